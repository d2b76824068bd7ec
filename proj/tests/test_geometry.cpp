#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "srbridge/geometry.hpp"
#include "srbridge/rng.hpp"

using namespace srb;

namespace {

Point pt(std::initializer_list<double> v) {
    Point p(static_cast<int>(v.size()));
    int i = 0;
    for (double x : v) p(i++) = x;
    return p;
}

SubRiemannianModel heis_fd() {
    // Heisenberg with the analytic frame derivatives stripped, so the finite
    // difference path is exercised.
    SubRiemannianModel m = heisenberg_model(1);
    m.frame_jacobian = nullptr;
    return m;
}

}  // namespace

TEST_CASE("flat connection on the Heisenberg frame") {
    const SubRiemannianModel m = heisenberg_model(1);
    for (const Point& x : {pt({0, 0, 0}), pt({1.3, -0.4, 2.0})}) {
        const Point st = flat_connection(m, 0, 1, x);  // nabla_sigma tau
        REQUIRE(st(0) == Catch::Approx(0.0).margin(1e-14));
        REQUIRE(st(1) == Catch::Approx(0.0).margin(1e-14));
        REQUIRE(st(2) == Catch::Approx(0.5).margin(1e-14));
        const Point ss = flat_connection(m, 0, 0, x);  // nabla_sigma sigma
        REQUIRE(ss.cwiseAbs().maxCoeff() < 1e-14);
    }
    const SubRiemannianModel e = euclidean_model(3);
    REQUIRE(flat_connection(e, 0, 2, pt({1, 2, 3})).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE_THROWS_AS(flat_connection(m, 0, 5, pt({0, 0, 0})), ConfigError);
}

TEST_CASE("lie bracket of sigma and tau is the vertical field") {
    const SubRiemannianModel m = heisenberg_model(1);
    const Point b = lie_bracket(m, 0, 1, pt({0.7, -2.2, 0.1}));
    REQUIRE(b(0) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(b(1) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(b(2) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("bracket antisymmetry is exact") {
    const SubRiemannianModel m = custom_step2_model(0.3, -0.2);
    RngStream rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const Point x = pt({rng.gaussian(0.5), rng.gaussian(0.5), rng.gaussian()});
        for (int j1 = 0; j1 < m.k; ++j1)
            for (int j2 = 0; j2 < m.k; ++j2) {
                const Point a = lie_bracket(m, j1, j2, x);
                const Point b = lie_bracket(m, j2, j1, x);
                REQUIRE((a + b).cwiseAbs().maxCoeff() == 0.0);
            }
    }
    REQUIRE(lie_bracket(m, 1, 1, pt({0.1, 0.2, 0.3})).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(lie_bracket(euclidean_model(2), 0, 1, pt({1, 1})).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adapted chart centres and inverts the frame") {
    const SubRiemannianModel m = heisenberg_model(1);
    const AdaptedChart at0 = adapted_chart(m, pt({0, 0, 0}));
    REQUIRE((at0.inverse_frame - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

    // worked example: base (0, 2, 0), point (1, 2, 0)
    const AdaptedChart c = adapted_chart(m, pt({0, 2, 0}));
    const Eigen::VectorXd y = c(pt({1, 2, 0}));
    REQUIRE(y(0) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(y(1) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(y(2) == Catch::Approx(1.0).margin(1e-12));

    RngStream rng(17);
    for (int rep = 0; rep < 100; ++rep) {
        const Point x0 = pt({rng.gaussian(), rng.gaussian(), rng.gaussian()});
        const AdaptedChart ch = adapted_chart(m, x0);
        REQUIRE(ch(x0).norm() < 1e-12);
        const Eigen::MatrixXd prod = ch.inverse_frame * full_frame(m, x0);
        REQUIRE((prod - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("singular frames are rejected") {
    SubRiemannianModel m;
    m.d = 2;
    m.k = 2;
    m.frame = [](const Point&) {
        Eigen::MatrixXd F(2, 2);
        F << 1, 1, 1, 1;
        return F;
    };
    m.weights = {1, 1};
    validate_model(m);
    REQUIRE_THROWS_AS(adapted_chart(m, pt({0, 0})), NumericError);
}

TEST_CASE("only step-2 weight patterns pass validation") {
    SubRiemannianModel m = heisenberg_model(1);
    m.weights = {1, 1, 3};
    REQUIRE_THROWS_AS(validate_model(m), ConfigError);
    m.weights = {1, 2, 2};
    REQUIRE_THROWS_AS(validate_model(m), ConfigError);
    m.weights = {1, 1, 2};
    REQUIRE_NOTHROW(validate_model(m));
}

TEST_CASE("box-metric surrogate") {
    const SubRiemannianModel m = heisenberg_model(1);
    const AdaptedChart c = adapted_chart(m, pt({0, 0, 0}));
    REQUIRE(dhat_squared(m, c, pt({0, 0, 0})) == 0.0);
    REQUIRE(dhat_squared(m, c, pt({1, 1, 1})) == Catch::Approx(3.0));

    // k = d: reduces to the squared chart-image norm, checked directly
    SubRiemannianModel lin;
    lin.d = 3;
    lin.k = 3;
    Eigen::MatrixXd A(3, 3);
    A << 2, 0.3, -1, 0, 1.5, 0.2, 0.1, 0, 0.8;
    lin.frame = [A](const Point&) { return A; };
    lin.weights = {1, 1, 1};
    validate_model(lin);
    const Point x0 = pt({0.4, -0.2, 1.0});
    const AdaptedChart lc = adapted_chart(lin, x0);
    RngStream rng(3);
    for (int rep = 0; rep < 30; ++rep) {
        const Point x = pt({rng.gaussian(), rng.gaussian(), rng.gaussian()});
        const Eigen::VectorXd direct = A.fullPivLu().solve(x - x0);
        REQUIRE(dhat_squared(lin, lc, x) == Catch::Approx(direct.squaredNorm()).margin(1e-10));
    }
    const SubRiemannianModel e = euclidean_model(2);
    const AdaptedChart ec = adapted_chart(e, pt({1, 1}));
    REQUIRE(dhat_squared(e, ec, pt({4, 5})) == Catch::Approx(25.0));
}

TEST_CASE("approximate score") {
    const SubRiemannianModel e = euclidean_model(2);
    const Point x0 = pt({0.5, -1});
    const AdaptedChart ec = adapted_chart(e, x0);
    RngStream rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        const Point x = pt({rng.gaussian(), rng.gaussian()});
        const double t = 0.1 + rng.uniform01();
        const HorizontalCoeffs s = approx_score(e, ec, x, t);
        REQUIRE((s - (-(x - x0) / t)).cwiseAbs().maxCoeff() < 1e-12);
    }

    const SubRiemannianModel m = heisenberg_model(1);
    const AdaptedChart c = adapted_chart(m, pt({0, 0, 0}));
    REQUIRE(approx_score(m, c, pt({0, 0, 0}), 0.3).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE_THROWS_AS(approx_score(m, c, pt({1, 0, 0}), 0.0), ConfigError);

    // frozen values, cross-checked against the Heisenberg closed form with a
    // unit vertical constant: -t S = (x - (y/4) sgn z, y + (x/4) sgn z)
    auto unit_heis = [](const Point& q, double t) {
        const double s = sgn(q(2));
        return pt({-(q(0) - 0.25 * q(1) * s) / t, -(q(1) + 0.25 * q(0) * s) / t});
    };
    {
        const HorizontalCoeffs s = approx_score(m, c, pt({1, 0, 0}), 0.5);
        REQUIRE(s(0) == Catch::Approx(-2.0).margin(1e-12));
        REQUIRE(s(1) == Catch::Approx(0.0).margin(1e-12));
        REQUIRE((s - unit_heis(pt({1, 0, 0}), 0.5)).cwiseAbs().maxCoeff() < 1e-12);
    }
    {
        const HorizontalCoeffs s = approx_score(m, c, pt({1, 0, 1}), 0.5);
        REQUIRE(s(0) == Catch::Approx(-2.0).margin(1e-12));
        REQUIRE(s(1) == Catch::Approx(-0.5).margin(1e-12));
        REQUIRE((s - unit_heis(pt({1, 0, 1}), 0.5)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("stratonovich and ito drifts") {
    const SubRiemannianModel m = heisenberg_model(1);
    for (const Point& x : {pt({0, 0, 0}), pt({1, 2, -1})}) {
        REQUIRE(stratonovich_drift(m, x).cwiseAbs().maxCoeff() < 1e-13);
        REQUIRE(ito_drift(m, x).cwiseAbs().maxCoeff() < 1e-13);
    }

    const Point c = pt({0.3, -0.7});
    const SubRiemannianModel e = euclidean_model(2, c);
    REQUIRE((stratonovich_drift(e, pt({1, 1})) - c).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE((ito_drift(e, pt({1, 1})) - c).cwiseAbs().maxCoeff() < 1e-14);

    // tau_0 - sigma_0 = (1/2) sum_j nabla_{sigma_j} sigma_j
    const SubRiemannianModel cm = custom_step2_model(0.4, -0.3);
    const Point x = pt({0.2, 0.5, -0.1});
    Point corr = Point::Zero(3);
    for (int j = 0; j < cm.k; ++j) corr += 0.5 * flat_connection(cm, j, j, x);
    REQUIRE((ito_drift(cm, x) - stratonovich_drift(cm, x) - corr).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("finite differences agree with the analytic frame derivatives") {
    const SubRiemannianModel exact = heisenberg_model(1);
    const SubRiemannianModel fd = heis_fd();
    RngStream rng(23);
    double worst = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const Point x = pt({rng.gaussian(), rng.gaussian(), rng.gaussian()});
        const FrameJacobian a = frame_derivatives(exact, x);
        const FrameJacobian b = frame_derivatives(fd, x);
        for (int j = 0; j < exact.k; ++j)
            worst = std::max(worst, (a[j] - b[j]).cwiseAbs().maxCoeff());
    }
    REQUIRE(worst < 1e-6);
}
