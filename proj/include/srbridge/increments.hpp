#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "srbridge/errors.hpp"
#include "srbridge/rng.hpp"

namespace srb {

enum class LevyMethod { fourier, polynomial };

inline LevyMethod levy_method_from_string(const std::string& s) {
    if (s == "fourier") return LevyMethod::fourier;
    if (s == "polynomial") return LevyMethod::polynomial;
    throw ConfigError("unknown levy method '" + s + "' (fourier|polynomial)");
}

// One step's driving noise: Brownian increments dW ~ N(0, delta), the
// truncated Levy-area matrix (exactly antisymmetric, zero diagonal), and for
// the polynomial method the coefficients c_{j,m} that generated it.
struct StepIncrement {
    Eigen::VectorXd dW;       // k
    Eigen::MatrixXd levy;     // k x k antisymmetric
    Eigen::MatrixXd aux_c;    // k x K2 polynomial coefficients (empty otherwise)
    double delta = 0.0;

    double heisenberg_area() const {
        // sum_j A^{j, k+j} for a 2k-dimensional driving noise
        const int pairs = static_cast<int>(dW.size()) / 2;
        double a = 0.0;
        for (int j = 0; j < pairs; ++j) a += levy(j, pairs + j);
        return a;
    }
};

// Draws dW and the truncated Levy areas. The Fourier route truncates both
// series of the classical bridge expansion at K2 terms; the polynomial route
// uses K2 coefficients c_{j,m} ~ N(0, delta/(2m+1)) per dimension.
inline StepIncrement sample_increment(RngStream& rng, int k, double delta, int K2,
                                      LevyMethod method) {
    if (K2 < 1) throw ConfigError("sample_increment: K2 must be >= 1");
    if (delta <= 0) throw ConfigError("sample_increment: delta must be positive");
    StepIncrement inc;
    inc.delta = delta;
    const double sd = std::sqrt(delta);
    inc.dW.resize(k);
    for (int j = 0; j < k; ++j) inc.dW(j) = rng.gaussian(sd);
    inc.levy = Eigen::MatrixXd::Zero(k, k);

    if (method == LevyMethod::polynomial) {
        inc.aux_c.resize(k, K2);
        for (int j = 0; j < k; ++j)
            for (int m = 1; m <= K2; ++m)
                inc.aux_c(j, m - 1) = rng.gaussian(std::sqrt(delta / (2.0 * m + 1.0)));
        for (int j = 0; j < k; ++j) {
            for (int l = j + 1; l < k; ++l) {
                double a = 0.5 * (inc.aux_c(l, 0) * inc.dW(j) - inc.aux_c(j, 0) * inc.dW(l));
                for (int m = 0; m + 1 < K2; ++m)
                    a += 0.5 * (inc.aux_c(j, m) * inc.aux_c(l, m + 1) -
                                inc.aux_c(j, m + 1) * inc.aux_c(l, m));
                inc.levy(j, l) = a;
                inc.levy(l, j) = -a;
            }
        }
    } else {
        Eigen::MatrixXd a(k, K2), b(k, K2);
        for (int j = 0; j < k; ++j)
            for (int m = 1; m <= K2; ++m) {
                const double s = std::sqrt(delta / (2.0 * std::numbers::pi * std::numbers::pi * m * m));
                a(j, m - 1) = rng.gaussian(s);
                b(j, m - 1) = rng.gaussian(s);
            }
        for (int j = 0; j < k; ++j) {
            for (int l = j + 1; l < k; ++l) {
                double area = 0.0;
                for (int m = 1; m <= K2; ++m) {
                    area += a(l, m - 1) * inc.dW(j) - a(j, m - 1) * inc.dW(l);
                    area += std::numbers::pi * m *
                            (a(j, m - 1) * b(l, m - 1) - a(l, m - 1) * b(j, m - 1));
                }
                inc.levy(j, l) = area;
                inc.levy(l, j) = -area;
            }
        }
    }
    return inc;
}

// Increment with no Levy areas sampled; enough for plain Euler steps.
inline StepIncrement sample_brownian_increment(RngStream& rng, int k, double delta) {
    StepIncrement inc;
    inc.delta = delta;
    const double sd = std::sqrt(delta);
    inc.dW.resize(k);
    for (int j = 0; j < k; ++j) inc.dW(j) = rng.gaussian(sd);
    inc.levy = Eigen::MatrixXd::Zero(k, k);
    return inc;
}

// Chen composition of consecutive increments:
//   A_{s,u} = A_{s,t} + A_{t,u} + (W_{s,t} (x) W_{t,u} - W_{t,u} (x) W_{s,t})/2.
// Used to coarsen a fine noise grid while keeping the same underlying path.
inline StepIncrement chen_combine(const StepIncrement& first, const StepIncrement& second) {
    StepIncrement out;
    out.delta = first.delta + second.delta;
    out.dW = first.dW + second.dW;
    out.levy = first.levy + second.levy +
               0.5 * (first.dW * second.dW.transpose() - second.dW * first.dW.transpose());
    return out;
}

}  // namespace srb
