#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "srbridge/errors.hpp"

namespace srb {

using Point = Eigen::VectorXd;                 // local coordinates, length d
using HorizontalCoeffs = Eigen::VectorXd;      // frame coefficients, length k

// Derivatives of the horizontal frame entries: D(i, j*d + l) is not used;
// instead a FrameJacobian J is laid out as J[j](i, l) = d sigma^i_j / d x^l
// for the horizontal columns j = 0..k-1.
using FrameJacobian = std::vector<Eigen::MatrixXd>;

// Step-2 sub-Riemannian model in a single chart. The frame callback returns
// the d x k matrix of horizontal fields (columns sigma_1..sigma_k), the
// extension returns the d x (d-k) completion to a frame of the tangent space,
// and drift_z is the first-order vector field Z in L = Delta + 2Z.
struct SubRiemannianModel {
    int d = 0;
    int k = 0;
    std::function<Eigen::MatrixXd(const Point&)> frame;
    std::function<Eigen::MatrixXd(const Point&)> frame_extension;  // may be null when k == d
    std::function<Point(const Point&)> drift_z;                    // may be null for Z = 0
    std::vector<int> weights;   // nu_i in {1,2}; 1 exactly for i < k
    double fd_step = 1e-5;
    // Optional analytic derivatives of the horizontal frame; takes precedence
    // over finite differences when set.
    std::function<FrameJacobian(const Point&)> frame_jacobian;
    // Set by the Heisenberg factory (number of sigma/tau pairs); 0 otherwise.
    int heisenberg_pairs = 0;

    Point drift_at(const Point& x) const {
        if (!drift_z) return Point::Zero(d);
        return drift_z(x);
    }
};

inline void validate_model(const SubRiemannianModel& m) {
    if (m.d <= 0 || m.k <= 0 || m.k > m.d) throw ConfigError("model: need 0 < k <= d");
    if (!m.frame) throw ConfigError("model: missing frame");
    if (m.k < m.d && !m.frame_extension) throw ConfigError("model: missing frame extension");
    if (static_cast<int>(m.weights.size()) != m.d) throw ConfigError("model: weights size != d");
    for (int i = 0; i < m.d; ++i) {
        const int w = m.weights[i];
        if (w != 1 && w != 2) throw ConfigError("model: only step-2 structures supported (weights in {1,2})");
        if (i < m.k && w != 1) throw ConfigError("model: weights must be 1 for horizontal coordinates");
        if (i >= m.k && w != 2) throw ConfigError("model: weights must be 2 past the horizontal rank");
        if (i > 0 && m.weights[i] < m.weights[i - 1]) throw ConfigError("model: weights must be nondecreasing");
    }
    if (m.fd_step <= 0) throw ConfigError("model: fd_step must be positive");
}

// Full d x d frame [frame | extension] at x.
inline Eigen::MatrixXd full_frame(const SubRiemannianModel& m, const Point& x) {
    Eigen::MatrixXd F(m.d, m.d);
    F.leftCols(m.k) = m.frame(x);
    if (m.k < m.d) F.rightCols(m.d - m.k) = m.frame_extension(x);
    if (!F.allFinite()) throw NumericError("frame evaluation produced non-finite entries");
    return F;
}

// d sigma^i_j / d x^l for horizontal columns, by central differences of step
// fd_step, or through the registered analytic closure.
inline FrameJacobian frame_derivatives(const SubRiemannianModel& m, const Point& x) {
    if (m.frame_jacobian) return m.frame_jacobian(x);
    FrameJacobian J(m.k, Eigen::MatrixXd::Zero(m.d, m.d));
    const double h = m.fd_step;
    Point xp = x, xm = x;
    for (int l = 0; l < m.d; ++l) {
        xp(l) = x(l) + h;
        xm(l) = x(l) - h;
        const Eigen::MatrixXd fp = m.frame(xp);
        const Eigen::MatrixXd fm = m.frame(xm);
        if (!fp.allFinite() || !fm.allFinite())
            throw NumericError("frame evaluation produced non-finite entries");
        for (int j = 0; j < m.k; ++j) {
            J[j].col(l) = (fp.col(j) - fm.col(j)) / (2.0 * h);
        }
        xp(l) = x(l);
        xm(l) = x(l);
    }
    return J;
}

// div_{dx} sigma_j = sum_l d sigma^l_j / d x^l for each horizontal column.
inline Eigen::VectorXd frame_divergences(const SubRiemannianModel& m, const Point& x) {
    const FrameJacobian J = frame_derivatives(m, x);
    Eigen::VectorXd div(m.k);
    for (int j = 0; j < m.k; ++j) div(j) = J[j].trace();
    return div;
}

// Flat-connection derivative nabla_{sigma_j1} sigma_j2 in coordinates:
// component i is sum_l sigma^l_{j1}(x) d_l sigma^i_{j2}(x). Indices are
// 0-based and must address horizontal columns.
inline Point flat_connection(const SubRiemannianModel& m, int j1, int j2, const Point& x) {
    if (j1 < 0 || j1 >= m.k || j2 < 0 || j2 >= m.k)
        throw ConfigError("flat_connection: frame index out of range");
    const FrameJacobian J = frame_derivatives(m, x);
    const Eigen::MatrixXd sigma = m.frame(x);
    if (!sigma.allFinite()) throw NumericError("frame evaluation produced non-finite entries");
    return J[j2] * sigma.col(j1);
}

inline Point lie_bracket(const SubRiemannianModel& m, int j1, int j2, const Point& x) {
    const FrameJacobian J = frame_derivatives(m, x);
    const Eigen::MatrixXd sigma = m.frame(x);
    if (!sigma.allFinite()) throw NumericError("frame evaluation produced non-finite entries");
    return J[j2] * sigma.col(j1) - J[j1] * sigma.col(j2);
}

// All nabla_{sigma_j1} sigma_j2 at once; [j1][j2] order matches flat_connection.
inline std::vector<std::vector<Point>> connection_table(const SubRiemannianModel& m, const Point& x) {
    const FrameJacobian J = frame_derivatives(m, x);
    const Eigen::MatrixXd sigma = m.frame(x);
    std::vector<std::vector<Point>> T(m.k, std::vector<Point>(m.k));
    for (int j1 = 0; j1 < m.k; ++j1)
        for (int j2 = 0; j2 < m.k; ++j2) T[j1][j2] = J[j2] * sigma.col(j1);
    return T;
}

// Adapted (privileged) chart at x0: y = inverse_frame * (x - x0).
struct AdaptedChart {
    Point base;
    Eigen::MatrixXd inverse_frame;  // sigma^{-1}(x0), rows sigma^i_{-l}

    Eigen::VectorXd operator()(const Point& x) const { return inverse_frame * (x - base); }
};

inline AdaptedChart adapted_chart(const SubRiemannianModel& m, const Point& x0) {
    const Eigen::MatrixXd F = full_frame(m, x0);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(F);
    if (std::abs(lu.determinant()) < 1e-12)
        throw NumericError("adapted_chart: full frame is singular at the base point");
    return AdaptedChart{x0, lu.inverse()};
}

// Box-metric distance surrogate: sum |y^i|^2 over weight-1 coordinates plus
// sum |y^i| over weight-2 coordinates.
inline double dhat_squared(const SubRiemannianModel& m, const AdaptedChart& chart, const Point& x) {
    const Eigen::VectorXd y = chart(x);
    double s = 0.0;
    for (int i = 0; i < m.d; ++i) s += (m.weights[i] == 1) ? y(i) * y(i) : std::abs(y(i));
    return s;
}

inline double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Approximate score S_hat_t(x0, x) as frame coefficients at x:
//   S^j = -(1/t) sum_{i<k} (sigma_j y^i)(x) y^i
//         -(1/2t) sum_{i>=k} (sigma_j y^i)(x) sgn(y^i),
// with sigma_j y^i = sum_l sigma^l_j(x) sigma^i_{-l}(x0).
inline HorizontalCoeffs approx_score(const SubRiemannianModel& m, const AdaptedChart& chart,
                                     const Point& x, double t) {
    if (t <= 0) throw ConfigError("approx_score: t must be positive");
    const Eigen::VectorXd y = chart(x);
    const Eigen::MatrixXd sigma = m.frame(x);
    // dy(i, j) = sigma_j y^i.
    const Eigen::MatrixXd dy = chart.inverse_frame * sigma;
    HorizontalCoeffs s = HorizontalCoeffs::Zero(m.k);
    for (int j = 0; j < m.k; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m.d; ++i) {
            if (m.weights[i] == 1)
                acc += dy(i, j) * y(i) / t;
            else
                acc += 0.5 * dy(i, j) * sgn(y(i)) / t;
        }
        s(j) = -acc;
    }
    return s;
}

// Stratonovich drift sigma_0 = (1/2) sum_j (div sigma_j) sigma_j + Z, chosen
// so the simulated process has generator (1/2)Delta + Z.
inline Point stratonovich_drift(const SubRiemannianModel& m, const Point& x) {
    const Eigen::MatrixXd sigma = m.frame(x);
    const Eigen::VectorXd div = frame_divergences(m, x);
    return 0.5 * (sigma * div) + m.drift_at(x);
}

// Ito drift tau_0 = sigma_0 + (1/2) sum_j nabla_{sigma_j} sigma_j.
inline Point ito_drift(const SubRiemannianModel& m, const Point& x) {
    const FrameJacobian J = frame_derivatives(m, x);
    const Eigen::MatrixXd sigma = m.frame(x);
    Eigen::VectorXd div(m.k);
    for (int j = 0; j < m.k; ++j) div(j) = J[j].trace();
    Point t0 = 0.5 * (sigma * div) + m.drift_at(x);
    for (int j = 0; j < m.k; ++j) t0 += 0.5 * (J[j] * sigma.col(j));
    return t0;
}

// ---------------------------------------------------------------------------
// Built-in model factories
// ---------------------------------------------------------------------------

// Euclidean R^d: identity frame, all weights 1, optional constant drift.
inline SubRiemannianModel euclidean_model(int d, Point constant_drift = Point()) {
    SubRiemannianModel m;
    m.d = d;
    m.k = d;
    m.frame = [d](const Point&) { return Eigen::MatrixXd::Identity(d, d); };
    if (constant_drift.size() > 0) {
        m.drift_z = [constant_drift](const Point&) { return constant_drift; };
    }
    m.weights.assign(d, 1);
    m.frame_jacobian = [d](const Point&) { return FrameJacobian(d, Eigen::MatrixXd::Zero(d, d)); };
    validate_model(m);
    return m;
}

// Heisenberg group of dimension 2k+1 embedded as a coordinate model.
// Columns 0..k-1 are sigma_j = d_{x^j} - (y^j/2) d_z, columns k..2k-1 are
// tau_j = d_{y^j} + (x^j/2) d_z; the extension is d_z.
inline SubRiemannianModel heisenberg_model(int pairs) {
    if (pairs < 1) throw ConfigError("heisenberg_model: need k >= 1");
    SubRiemannianModel m;
    const int kk = pairs;
    m.d = 2 * kk + 1;
    m.k = 2 * kk;
    m.heisenberg_pairs = kk;
    m.frame = [kk](const Point& q) {
        Eigen::MatrixXd F = Eigen::MatrixXd::Zero(2 * kk + 1, 2 * kk);
        for (int j = 0; j < kk; ++j) {
            F(j, j) = 1.0;
            F(2 * kk, j) = -0.5 * q(kk + j);
            F(kk + j, kk + j) = 1.0;
            F(2 * kk, kk + j) = 0.5 * q(j);
        }
        return F;
    };
    m.frame_extension = [kk](const Point&) {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(2 * kk + 1, 1);
        E(2 * kk, 0) = 1.0;
        return E;
    };
    m.frame_jacobian = [kk](const Point&) {
        FrameJacobian J(2 * kk, Eigen::MatrixXd::Zero(2 * kk + 1, 2 * kk + 1));
        for (int j = 0; j < kk; ++j) {
            J[j](2 * kk, kk + j) = -0.5;       // d sigma^z_j / d y^j
            J[kk + j](2 * kk, j) = 0.5;        // d tau^z_j / d x^j
        }
        return J;
    };
    m.weights.assign(2 * kk + 1, 1);
    m.weights[2 * kk] = 2;
    validate_model(m);
    return m;
}

// A step-2 demo geometry on R^3 with position-dependent frame scales:
//   sigma_1 = ((1 + alpha x), 0, -y/2),  sigma_2 = (0, (1 + beta y), x/2),
// extension d_z, optional constant drift. Valid where the scale factors stay
// positive; exercises nonzero frame divergences and connection terms.
inline SubRiemannianModel custom_step2_model(double alpha, double beta, Point constant_drift = Point()) {
    SubRiemannianModel m;
    m.d = 3;
    m.k = 2;
    m.frame = [alpha, beta](const Point& q) {
        Eigen::MatrixXd F = Eigen::MatrixXd::Zero(3, 2);
        F(0, 0) = 1.0 + alpha * q(0);
        F(2, 0) = -0.5 * q(1);
        F(1, 1) = 1.0 + beta * q(1);
        F(2, 1) = 0.5 * q(0);
        return F;
    };
    m.frame_extension = [](const Point&) {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, 1);
        E(2, 0) = 1.0;
        return E;
    };
    m.frame_jacobian = [alpha, beta](const Point&) {
        FrameJacobian J(2, Eigen::MatrixXd::Zero(3, 3));
        J[0](0, 0) = alpha;
        J[0](2, 1) = -0.5;
        J[1](1, 1) = beta;
        J[1](2, 0) = 0.5;
        return J;
    };
    if (constant_drift.size() > 0) {
        m.drift_z = [constant_drift](const Point&) { return constant_drift; };
    }
    m.weights = {1, 1, 2};
    validate_model(m);
    return m;
}

}  // namespace srb
