#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "srbridge/errors.hpp"
#include "srbridge/geometry.hpp"

namespace srb::heis {

// Point of the (2k+1)-dimensional Heisenberg group, coordinates q = (x, y, z).
struct HeisPoint {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    double z = 0.0;

    int pairs() const { return static_cast<int>(x.size()); }

    static HeisPoint zero(int k) {
        return HeisPoint{Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k), 0.0};
    }

    Point flat() const {
        Point p(2 * pairs() + 1);
        p.head(pairs()) = x;
        p.segment(pairs(), pairs()) = y;
        p(2 * pairs()) = z;
        return p;
    }

    static HeisPoint from_flat(const Point& p) {
        const int k = static_cast<int>((p.size() - 1) / 2);
        if (p.size() != 2 * k + 1) throw ConfigError("HeisPoint: flat vector must have odd length");
        return HeisPoint{p.head(k), p.segment(k, k), p(2 * k)};
    }
};

inline void check_pairs(const HeisPoint& a, const HeisPoint& b) {
    if (a.pairs() != b.pairs() || a.y.size() != a.x.size() || b.y.size() != b.x.size())
        throw ConfigError("HeisPoint: dimension mismatch");
}

// Group law (x~,y~,z~)(x,y,z) = (x~+x, y~+y, z~+z+((x~.y)-(x.y~))/2).
inline HeisPoint group_mul(const HeisPoint& a, const HeisPoint& b) {
    check_pairs(a, b);
    return HeisPoint{a.x + b.x, a.y + b.y,
                     a.z + b.z + 0.5 * (a.x.dot(b.y) - b.x.dot(a.y))};
}

inline HeisPoint group_inv(const HeisPoint& q) { return HeisPoint{-q.x, -q.y, -q.z}; }

// Left-invariant frame at q; column j is sigma_j, column k+j is tau_j.
inline Eigen::MatrixXd frames(const HeisPoint& q) {
    const int k = q.pairs();
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(2 * k + 1, 2 * k);
    for (int j = 0; j < k; ++j) {
        F(j, j) = 1.0;
        F(2 * k, j) = -0.5 * q.y(j);
        F(k + j, k + j) = 1.0;
        F(2 * k, k + j) = 0.5 * q.x(j);
    }
    return F;
}

// Surrogate squared distance f_hat(q)^2 = |x|^2 + |y|^2 + 4*pi*|z|.
inline double fhat_squared(const HeisPoint& q) {
    return q.x.squaredNorm() + q.y.squaredNorm() + 4.0 * std::numbers::pi * std::abs(q.z);
}

// Frame coefficients of the approximate score S_hat_t(0, q):
//   -t S^j = x^j - pi y^j sgn(z),  -t S^{k+j} = y^j + pi x^j sgn(z).
// For a base point q~ pass group_mul(group_inv(q~), q) (left invariance).
inline Eigen::VectorXd score_hat(const HeisPoint& q, double t) {
    if (t <= 0) throw ConfigError("score_hat: t must be positive");
    const int k = q.pairs();
    const double s = sgn(q.z);
    Eigen::VectorXd out(2 * k);
    for (int j = 0; j < k; ++j) {
        out(j) = -(q.x(j) - std::numbers::pi * q.y(j) * s) / t;
        out(k + j) = -(q.y(j) + std::numbers::pi * q.x(j) * s) / t;
    }
    return out;
}

// Exact-in-law diffusion step: left-translate q by the group increment
// (dW_{1..k}, dW_{k+1..2k}, dA) where dA is the summed Levy area over the step.
inline HeisPoint heis_step(const HeisPoint& q, const Eigen::VectorXd& dW, double dA) {
    const int k = q.pairs();
    if (dW.size() != 2 * k) throw ConfigError("heis_step: increment dimension mismatch");
    return group_mul(q, HeisPoint{dW.head(k), dW.tail(k), dA});
}

// ---------------------------------------------------------------------------
// Heat kernel (Gaveau formula)
// ---------------------------------------------------------------------------

inline double default_lambda_max(double t) { return std::min(40.0 / t, 400.0); }
inline constexpr int default_quad_nodes = 2001;

namespace detail {

// Trapezoid quadrature of
//   p_t(q) = 4/(2 pi t)^{k+1} Int (2L/sinh 2L)^k
//            exp(-L coth(2L) r^2/t) cos(4 L z / t) dL
// over [-lambda_max, lambda_max]. The integrand cancels down to values far
// below its peak for |z|/t large, so the sum is carried in mpfr with enough
// bits to resolve the cancellation; the envelope at L=0 is exp(-r^2/2t) and
// the result sits near exp(-(r^2/2 + 2 pi |z|)/t).
template <class Real>
double gaveau_trapezoid(int k, double r2, double z, double t, double lambda_max, int n_quad) {
    using std::abs;
    using std::cos;
    using std::cosh;
    using std::exp;
    using std::pow;
    using std::sinh;
    const Real pi_r = boost::math::constants::pi<Real>();
    const Real rt(t), rr2(r2), rz(z);
    const Real osc = 4 * rz / rt;
    const Real h = Real(2 * lambda_max) / (n_quad - 1);
    std::vector<Real> terms;
    terms.reserve(n_quad);
    for (int i = 0; i < n_quad; ++i) {
        const Real lam = Real(-lambda_max) + h * i;
        Real val;
        if (abs(lam) < Real(1e-30)) {
            val = exp(-rr2 / (2 * rt));  // (2L/sinh2L)^k -> 1, L coth 2L -> 1/2
        } else {
            const Real twol = 2 * lam;
            const Real env = pow(twol / sinh(twol), k);
            const Real lcoth = lam * cosh(twol) / sinh(twol);
            val = env * exp(-lcoth * rr2 / rt) * cos(osc * lam);
        }
        if (i == 0 || i == n_quad - 1) val /= 2;
        terms.push_back(val);
    }
    // pairwise tree sum keeps the cancellation error near machine precision
    std::size_t n = terms.size();
    while (n > 1) {
        std::size_t half = n / 2;
        for (std::size_t i = 0; i < half; ++i) terms[i] = terms[2 * i] + terms[2 * i + 1];
        if (n % 2 == 1) {
            terms[half] = terms[n - 1];
            n = half + 1;
        } else {
            n = half;
        }
    }
    const Real norm = 4 / pow(2 * pi_r * rt, k + 1);
    return static_cast<double>(terms[0] * h * norm);
}

}  // namespace detail

// Depth of the cancellation in the oscillatory sum, in nats: the terms peak
// near exp(-r^2/2t) while the result sits near exp(-f^2/2t), and
// f^2 - r^2 <= r^2 + 8 pi |z| by the Lipschitz bounds on f_hat.
inline double heat_kernel_cancellation_nats(const HeisPoint& q, double t) {
    const double r2 = q.x.squaredNorm() + q.y.squaredNorm();
    return (r2 + 8.0 * std::numbers::pi * std::abs(q.z)) / (2.0 * t);
}

inline double heat_kernel(const HeisPoint& q, double t, double lambda_max, int n_quad) {
    if (t <= 0) throw ConfigError("heat_kernel: t must be positive");
    if (n_quad < 8) throw ConfigError("heat_kernel: need at least 8 quadrature nodes");
    const int k = q.pairs();
    const double r2 = q.x.squaredNorm() + q.y.squaredNorm();
    const double nats = heat_kernel_cancellation_nats(q, t);
    double p;
    if (nats <= 15.0) {
        p = detail::gaveau_trapezoid<double>(k, r2, q.z, t, lambda_max, n_quad);
    } else {
        using mp = boost::multiprecision::mpfr_float;
        boost::multiprecision::mpfr_float::default_precision(
            20 + static_cast<unsigned>(nats / 2.302585));  // digits10
        p = detail::gaveau_trapezoid<mp>(k, r2, q.z, t, lambda_max, n_quad);
    }
    return std::max(p, 0.0);
}

inline double heat_kernel(const HeisPoint& q, double t) {
    return heat_kernel(q, t, default_lambda_max(t), default_quad_nodes);
}

struct QuadratureHint {
    double lambda_max;
    int n_quad;
};

// Quadrature parameters that push truncation and aliasing error below the
// expected result magnitude. The integrand oscillates at 4|z|/t and is
// analytic in a strip of half-width pi/2, so the trapezoid aliasing error
// decays like exp(-(pi/2)(2 pi / h - omega)).
inline QuadratureHint suggested_quadrature(const HeisPoint& q, double t) {
    const int k = std::max(1, q.pairs());
    const double r2 = q.x.squaredNorm() + q.y.squaredNorm();
    const double nats = (r2 + 8.0 * std::numbers::pi * std::abs(q.z)) / (2.0 * t) + 40.0;
    const double omega = 4.0 * std::abs(q.z) / t;
    const double lambda_max = std::max(20.0, nats / (2.0 * k) + 10.0);
    const double h = std::min(0.05, 2.0 * std::numbers::pi / (omega + 2.0 * nats / std::numbers::pi + 40.0));
    int n = static_cast<int>(std::ceil(2.0 * lambda_max / h)) + 1;
    if (n % 2 == 0) ++n;  // keep a node at 0
    return QuadratureHint{lambda_max, n};
}

// ---------------------------------------------------------------------------
// Geodesics
// ---------------------------------------------------------------------------

namespace detail {

// phi(w) = (w - sin w) / (8 sin^2(w/2)); strictly increasing from 0 to
// infinity on (0, 2 pi). Solves the vertical-parameter equation
// phi(w) = z / |zeta|^2 for origin-based targets.
inline double geodesic_phi(double w) {
    const double s = std::sin(0.5 * w);
    return (w - std::sin(w)) / (8.0 * s * s);
}

}  // namespace detail

// Discretized minimizing geodesic from q0 to q1 with steps+1 samples.
// Left-translates to an origin-based problem, solves for the rotation rate w
// by bisection, and maps the classical parameterization back.
inline std::vector<HeisPoint> geodesic(const HeisPoint& q0, const HeisPoint& q1, int steps) {
    check_pairs(q0, q1);
    if (steps < 1) throw ConfigError("geodesic: need steps >= 1");
    const int k = q0.pairs();
    const HeisPoint target = group_mul(group_inv(q0), q1);
    const double zeta2 = target.x.squaredNorm() + target.y.squaredNorm();
    if (zeta2 == 0.0 && target.z == 0.0) throw ConfigError("geodesic: endpoints coincide");

    // Horizontal velocity eta(t) = eta0 e^{i w t} per pair; represent eta0
    // componentwise as (ex, ey).
    Eigen::VectorXd ex(k), ey(k);
    double w = 0.0;
    if (zeta2 == 0.0) {
        // Pure vertical target: w = +-2 pi, any horizontal direction.
        w = 2.0 * std::numbers::pi * sgn(target.z);
        const double speed = 2.0 * std::sqrt(std::numbers::pi * std::abs(target.z));
        ex.setZero();
        ey.setZero();
        ex(0) = speed;
    } else {
        const double ratio = target.z / zeta2;
        const double mag = std::abs(ratio);
        if (mag < 1e-14) {
            w = 0.0;
        } else {
            double lo = 1e-12, hi = 2.0 * std::numbers::pi - 1e-12;
            int it = 0;
            for (; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double r = detail::geodesic_phi(mid) - mag;
                if (std::abs(r) < 1e-10 * std::max(1.0, mag)) {
                    lo = hi = mid;
                    break;
                }
                (r < 0 ? lo : hi) = mid;
            }
            w = 0.5 * (lo + hi);
            if (std::abs(detail::geodesic_phi(w) - mag) > 1e-6 * std::max(1.0, mag))
                throw NumericError("geodesic: bisection failed to converge");
            if (ratio < 0) w = -w;
        }
        // eta0 = zeta1 * (i w) / (e^{i w} - 1); limit zeta1 at w = 0.
        std::complex<double> factor(1.0, 0.0);
        if (w != 0.0) {
            const std::complex<double> iw(0.0, w);
            factor = iw / (std::exp(iw) - 1.0);
        }
        for (int j = 0; j < k; ++j) {
            const std::complex<double> e = std::complex<double>(target.x(j), target.y(j)) * factor;
            ex(j) = e.real();
            ey(j) = e.imag();
        }
    }

    const double speed2 = ex.squaredNorm() + ey.squaredNorm();
    std::vector<HeisPoint> path;
    path.reserve(steps + 1);
    for (int m = 0; m <= steps; ++m) {
        const double t = static_cast<double>(m) / steps;
        HeisPoint g = HeisPoint::zero(k);
        if (w == 0.0) {
            g.x = t * ex;
            g.y = t * ey;
            g.z = 0.0;
        } else {
            // zeta(t) = eta0 (e^{iwt} - 1)/(iw), z(t) = |eta0|^2 (wt - sin wt)/(2w^2)
            const std::complex<double> iw(0.0, w);
            const std::complex<double> f = (std::exp(iw * t) - 1.0) / iw;
            for (int j = 0; j < k; ++j) {
                const std::complex<double> e = std::complex<double>(ex(j), ey(j)) * f;
                g.x(j) = e.real();
                g.y(j) = e.imag();
            }
            g.z = speed2 * (w * t - std::sin(w * t)) / (2.0 * w * w);
        }
        path.push_back(group_mul(q0, g));
    }
    return path;
}

}  // namespace srb::heis
