#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "srbridge/heisenberg.hpp"
#include "srbridge/increments.hpp"
#include "srbridge/rng.hpp"

using namespace srb;
using namespace srb::heis;

namespace {

HeisPoint hp(double x, double y, double z) {
    HeisPoint q = HeisPoint::zero(1);
    q.x(0) = x;
    q.y(0) = y;
    q.z = z;
    return q;
}

HeisPoint random_point(RngStream& rng, int k) {
    HeisPoint q = HeisPoint::zero(k);
    for (int j = 0; j < k; ++j) {
        q.x(j) = rng.gaussian();
        q.y(j) = rng.gaussian();
    }
    q.z = rng.gaussian();
    return q;
}

double max_abs_diff(const HeisPoint& a, const HeisPoint& b) {
    return std::max({(a.x - b.x).cwiseAbs().maxCoeff(), (a.y - b.y).cwiseAbs().maxCoeff(),
                     std::abs(a.z - b.z)});
}

}  // namespace

TEST_CASE("group law basics") {
    REQUIRE(max_abs_diff(group_mul(HeisPoint::zero(1), hp(1, 2, 3)), hp(1, 2, 3)) == 0.0);
    REQUIRE(max_abs_diff(group_mul(hp(1, 0, 0), hp(0, 1, 0)), hp(1, 1, 0.5)) == 0.0);
    REQUIRE(max_abs_diff(group_mul(hp(0, 1, 0), hp(1, 0, 0)), hp(1, 1, -0.5)) == 0.0);
    REQUIRE(max_abs_diff(group_inv(hp(1, 2, 3)), hp(-1, -2, -3)) == 0.0);
    REQUIRE(max_abs_diff(group_inv(HeisPoint::zero(2)), HeisPoint::zero(2)) == 0.0);
    REQUIRE_THROWS_AS(group_mul(HeisPoint::zero(1), HeisPoint::zero(2)), ConfigError);
}

TEST_CASE("group axioms on random triples") {
    RngStream rng(101);
    for (int rep = 0; rep < 1000; ++rep) {
        const int k = 1 + (rep % 2);
        const HeisPoint a = random_point(rng, k), b = random_point(rng, k),
                        c = random_point(rng, k);
        const HeisPoint ab_c = group_mul(group_mul(a, b), c);
        const HeisPoint a_bc = group_mul(a, group_mul(b, c));
        REQUIRE(max_abs_diff(ab_c, a_bc) < 1e-12);
        REQUIRE(max_abs_diff(group_mul(a, group_inv(a)), HeisPoint::zero(k)) < 1e-15);
        REQUIRE(max_abs_diff(group_mul(group_inv(a), a), HeisPoint::zero(k)) < 1e-15);
    }
}

TEST_CASE("left-invariant frames") {
    {
        const Eigen::MatrixXd F = frames(hp(0, 2, 5));
        REQUIRE(F(0, 0) == 1.0);
        REQUIRE(F(1, 0) == 0.0);
        REQUIRE(F(2, 0) == -1.0);
    }
    {
        const Eigen::MatrixXd F = frames(HeisPoint::zero(1));
        REQUIRE((F.col(0) - Eigen::Vector3d(1, 0, 0)).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE((F.col(1) - Eigen::Vector3d(0, 1, 0)).cwiseAbs().maxCoeff() == 0.0);
    }
    {
        HeisPoint q = HeisPoint::zero(2);
        q.x << 1, 0;
        q.y << 0, 3;
        const Eigen::MatrixXd F = frames(q);  // tau_1 is column k = 2
        Eigen::VectorXd expect(5);
        expect << 0, 0, 1, 0, 0.5;
        REQUIRE((F.col(2) - expect).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("frames are left invariant under translations") {
    // |sigma_j(phi . l_q~)(q) - (sigma_j phi)(l_q~ q)| < 1e-6 by central FD
    auto phi = [](const Point& p) {
        return p(0) * p(0) * p(1) + 3.0 * p(2) * p(0) - 2.0 * p(2) * p(2) + p(1);
    };
    auto directional_fd = [&](const Point& base, const Eigen::VectorXd& dir,
                              auto&& fn) {
        const double h = 1e-6;
        return (fn(base + h * dir) - fn(base - h * dir)) / (2.0 * h);
    };
    RngStream rng(7);
    for (int rep = 0; rep < 40; ++rep) {
        const HeisPoint qt = random_point(rng, 1);
        const HeisPoint q = random_point(rng, 1);
        const Eigen::MatrixXd Fq = frames(q);
        const Eigen::MatrixXd Ftr = frames(group_mul(qt, q));
        for (int j = 0; j < 2; ++j) {
            auto composed = [&](const Point& p) {
                return phi(group_mul(qt, HeisPoint::from_flat(p)).flat());
            };
            const double lhs = directional_fd(q.flat(), Fq.col(j), composed);
            auto plain = [&](const Point& p) { return phi(p); };
            const double rhs = directional_fd(group_mul(qt, q).flat(), Ftr.col(j), plain);
            REQUIRE(lhs == Catch::Approx(rhs).margin(1e-6));
        }
    }
}

TEST_CASE("surrogate distance") {
    REQUIRE(fhat_squared(hp(0, 0, -2)) == Catch::Approx(8 * std::numbers::pi));
    REQUIRE(fhat_squared(hp(1, 0, 0)) == 1.0);
    REQUIRE(fhat_squared(hp(1, 1, 1)) == Catch::Approx(2 + 4 * std::numbers::pi));
    REQUIRE(fhat_squared(HeisPoint::zero(1)) == 0.0);
}

TEST_CASE("closed-form score approximation") {
    REQUIRE(score_hat(HeisPoint::zero(1), 0.7).cwiseAbs().maxCoeff() == 0.0);
    {
        const Eigen::VectorXd s = score_hat(hp(1, 0, 1), 0.5);
        REQUIRE(s(0) == Catch::Approx(-2.0));
        REQUIRE(s(1) == Catch::Approx(-2.0 * std::numbers::pi));
    }
    {
        const Eigen::VectorXd s = score_hat(hp(0, 1, 0), 1.0);  // sgn(0) = 0
        REQUIRE(s(0) == 0.0);
        REQUIRE(s(1) == -1.0);
    }
    REQUIRE_THROWS_AS(score_hat(hp(1, 0, 0), 0.0), ConfigError);
}

TEST_CASE("score matches the horizontal gradient of fhat^2 away from z = 0") {
    // S_hat = -(1/2t) grad^E (fhat^2 . l_q~^{-1}); check coefficients by FD
    RngStream rng(13);
    const double t = 0.4, h = 1e-6;
    for (int rep = 0; rep < 40; ++rep) {
        const HeisPoint base = random_point(rng, 1);
        HeisPoint q = random_point(rng, 1);
        const HeisPoint rel = group_mul(group_inv(base), q);
        if (std::abs(rel.z) < 1e-2) continue;
        const Eigen::VectorXd s = score_hat(rel, t);
        const Eigen::MatrixXd F = frames(q);
        for (int j = 0; j < 2; ++j) {
            auto f2 = [&](const Point& p) {
                return fhat_squared(group_mul(group_inv(base), HeisPoint::from_flat(p)));
            };
            const Point qf = q.flat();
            const double deriv =
                (f2(qf + h * F.col(j)) - f2(qf - h * F.col(j))) / (2.0 * h);
            REQUIRE(s(j) == Catch::Approx(-deriv / (2.0 * t)).margin(1e-5));
        }
    }
}

TEST_CASE("exact-in-law group steps") {
    const HeisPoint q = hp(0.3, -0.5, 0.9);
    REQUIRE(max_abs_diff(heis_step(q, Eigen::VectorXd::Zero(2), 0.0), q) == 0.0);
    {
        Eigen::VectorXd w(2);
        w << 0.7, -0.2;
        REQUIRE(max_abs_diff(heis_step(HeisPoint::zero(1), w, 0.4), hp(0.7, -0.2, 0.4)) == 0.0);
    }
    // successive steps compose by the group law
    RngStream rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        const HeisPoint start = random_point(rng, 1);
        Eigen::VectorXd w1(2), w2(2);
        w1 << rng.gaussian(), rng.gaussian();
        w2 << rng.gaussian(), rng.gaussian();
        const double a1 = rng.gaussian(), a2 = rng.gaussian();
        const HeisPoint two = heis_step(heis_step(start, w1, a1), w2, a2);
        const HeisPoint inc = group_mul(HeisPoint{w1.head(1), w1.tail(1), a1},
                                        HeisPoint{w2.head(1), w2.tail(1), a2});
        REQUIRE(max_abs_diff(two, group_mul(start, inc)) < 1e-12);
    }
    REQUIRE_THROWS_AS(heis_step(q, Eigen::VectorXd::Zero(3), 0.0), ConfigError);
}

TEST_CASE("single-step marginal moments") {
    const double t = 0.3;
    const int N = 100000;
    RngStream rng(2718);
    double sx = 0, sx2 = 0, sz = 0, sz2 = 0;
    for (int i = 0; i < N; ++i) {
        RngStream r = rng.derive(i);
        const StepIncrement inc = sample_increment(r, 2, t, 50, LevyMethod::polynomial);
        const HeisPoint q = heis_step(HeisPoint::zero(1), inc.dW, inc.heisenberg_area());
        sx += q.x(0);
        sx2 += q.x(0) * q.x(0);
        sz += q.z;
        sz2 += q.z * q.z;
    }
    const double mx = sx / N, vx = sx2 / N - mx * mx;
    const double mz = sz / N, vz = sz2 / N - mz * mz;
    REQUIRE(std::abs(mx) < 3.0 * std::sqrt(t / N));
    REQUIRE(vx == Catch::Approx(t).margin(3.0 * t * std::sqrt(2.0 / N)));
    REQUIRE(std::abs(mz) < 3.0 * std::sqrt(vz / N));
    REQUIRE(vz == Catch::Approx(t * t / 4.0).epsilon(0.05));
}

TEST_CASE("heat kernel is symmetric in z and positive") {
    const HeisPoint a = hp(0.4, 0.7, 0.6), b = hp(0.4, 0.7, -0.6);
    const QuadratureHint hint = suggested_quadrature(a, 0.5);
    const double pa = heat_kernel(a, 0.5, hint.lambda_max, hint.n_quad);
    const double pb = heat_kernel(b, 0.5, hint.lambda_max, hint.n_quad);
    REQUIRE(pa == Catch::Approx(pb).epsilon(1e-12));

    for (const double t : {0.1, 0.5, 1.0}) {
        for (const double x : {0.0, 0.5, 1.0})
            for (const double y : {0.0, 1.0})
                for (const double z : {0.0, 0.5, 1.0}) {
                    const HeisPoint q = hp(x, y, z);
                    const QuadratureHint h = suggested_quadrature(q, t);
                    REQUIRE(heat_kernel(q, t, h.lambda_max, h.n_quad) > 0.0);
                }
    }
    REQUIRE_THROWS_AS(heat_kernel(a, -1.0, 40.0, 201), ConfigError);
    REQUIRE_THROWS_AS(heat_kernel(a, 0.5, 40.0, 4), ConfigError);
}

TEST_CASE("heat kernel mass over a box matches Monte Carlo") {
    // P(X_t in [-0.5, 0.5]^3) via the exact scheme vs Simpson quadrature of p_t
    const double t = 0.5;
    const int N = 200000;
    RngStream rng(404);
    long hits = 0;
    for (int i = 0; i < N; ++i) {
        RngStream r = rng.derive(i);
        HeisPoint q = HeisPoint::zero(1);
        for (int s = 0; s < 16; ++s) {
            const StepIncrement inc = sample_increment(r, 2, t / 16, 10, LevyMethod::polynomial);
            q = heis_step(q, inc.dW, inc.heisenberg_area());
        }
        if (std::abs(q.x(0)) <= 0.5 && std::abs(q.y(0)) <= 0.5 && std::abs(q.z) <= 0.5) ++hits;
    }
    const double pmc = static_cast<double>(hits) / N;
    const double se = std::sqrt(pmc * (1 - pmc) / N);

    // 13-point Simpson per octant axis
    const int n = 13;
    const double h = 0.5 / (n - 1);
    std::vector<double> w(n, 0.0);
    for (int i = 0; i + 2 < n; i += 2) {
        w[i] += h / 3;
        w[i + 1] += 4 * h / 3;
        w[i + 2] += h / 3;
    }
    double mass = 0;
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz) {
                const HeisPoint q = hp(ix * h, iy * h, iz * h);
                mass += 8.0 * w[ix] * w[iy] * w[iz] * heat_kernel(q, t, 30.0, 601);
            }
    REQUIRE(mass == Catch::Approx(pmc).margin(4.0 * se + 0.003));
}

TEST_CASE("geodesics") {
    const HeisPoint o = HeisPoint::zero(1);
    {
        const auto path = geodesic(o, hp(1, 0, 0), 50);
        REQUIRE(path.size() == 51);
        for (const HeisPoint& q : path) REQUIRE(std::abs(q.z) < 1e-12);
        REQUIRE(path.back().x(0) == Catch::Approx(1.0).margin(1e-12));
    }
    {
        const double hgt = 0.8;
        const auto path = geodesic(o, hp(0, 0, hgt), 100);
        const HeisPoint rel = group_mul(group_inv(path.back()), hp(0, 0, hgt));
        REQUIRE(std::sqrt(fhat_squared(rel)) < 1e-6);
    }
    // length of the returned polyline against the Lipschitz band of fhat
    RngStream rng(31);
    for (int rep = 0; rep < 25; ++rep) {
        HeisPoint target = random_point(rng, 1);
        if (fhat_squared(target) < 1e-3) continue;
        const auto path = geodesic(o, target, 400);
        double len = 0;
        for (std::size_t i = 1; i < path.size(); ++i) {
            len += std::sqrt((path[i].x - path[i - 1].x).squaredNorm() +
                             (path[i].y - path[i - 1].y).squaredNorm());
        }
        const double fhat = std::sqrt(fhat_squared(target));
        REQUIRE(len >= fhat / (2.0 * std::sqrt(2.0)) * 0.999);
        REQUIRE(len <= std::sqrt(2.0) * fhat * 1.001);
    }
    REQUIRE_THROWS_AS(geodesic(o, o, 10), ConfigError);
}
