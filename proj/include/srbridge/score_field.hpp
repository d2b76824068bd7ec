#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "srbridge/errors.hpp"
#include "srbridge/geometry.hpp"
#include "srbridge/heisenberg.hpp"
#include "srbridge/network.hpp"

namespace srb {

// A time-dependent horizontal vector field given through its frame
// coefficients: eval(t, x) returns (S^1..S^k), jacobian(t, x) the matrix
// d S^j / d x^i (k x d). Network-backed and analytic fields share this shape.
struct ScoreField {
    int k = 0;
    std::function<HorizontalCoeffs(double, const Point&)> eval;
    std::function<Eigen::MatrixXd(double, const Point&)> jacobian;
};

inline ScoreField network_score_field(const NetworkParams& theta) {
    ScoreField f;
    f.k = theta.output_dim();
    f.eval = [theta](double t, const Point& x) { return forward(theta, t, x); };
    f.jacobian = [theta](double t, const Point& x) { return input_jacobian(theta, t, x); };
    return f;
}

// Gaussian score of Brownian motion started at x0: coefficients -(x - x0)/t.
inline ScoreField analytic_euclidean_score(const Point& x0) {
    ScoreField f;
    f.k = static_cast<int>(x0.size());
    f.eval = [x0](double t, const Point& x) -> HorizontalCoeffs {
        if (t <= 0) throw ConfigError("euclidean score: t must be positive");
        return (-(x - x0) / t).eval();
    };
    const int d = f.k;
    f.jacobian = [d](double t, const Point&) {
        return (-1.0 / t) * Eigen::MatrixXd::Identity(d, d);
    };
    return f;
}

// Surrogate Heisenberg score S_hat_t(q0, q) through left translation.
inline ScoreField analytic_heisenberg_score(const Point& x0_flat) {
    const heis::HeisPoint q0inv = heis::group_inv(heis::HeisPoint::from_flat(x0_flat));
    ScoreField f;
    f.k = 2 * q0inv.pairs();
    f.eval = [q0inv](double t, const Point& x) {
        return heis::score_hat(heis::group_mul(q0inv, heis::HeisPoint::from_flat(x)), t);
    };
    f.jacobian = [q0inv](double t, const Point& x) {
        // Chain rule through the left translation; sgn(z') is piecewise
        // constant so its derivative is taken as 0 (a.e. value).
        const int k = q0inv.pairs();
        const heis::HeisPoint q = heis::group_mul(q0inv, heis::HeisPoint::from_flat(x));
        const double s = sgn(q.z);
        const double pi = 3.14159265358979323846;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * k, 2 * k + 1);
        for (int j = 0; j < k; ++j) {
            J(j, j) = -1.0 / t;
            J(j, k + j) = pi * s / t;
            J(k + j, k + j) = -1.0 / t;
            J(k + j, j) = -pi * s / t;
        }
        return J;
    };
    return f;
}

}  // namespace srb
