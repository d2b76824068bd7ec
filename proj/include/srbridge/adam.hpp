#pragma once

#include <cmath>

#include "srbridge/errors.hpp"
#include "srbridge/network.hpp"

namespace srb {

// Adam moment accumulators matching theta's shape. With beta1 = beta2 = 0 the
// update degenerates to theta - lr * g / (|g| + eps), a plain gradient step
// with per-coordinate normalization.
struct AdamState {
    ParamGrad m;   // first moments
    ParamGrad v;   // second moments
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_params(const NetworkParams& p, double beta1 = 0.9, double beta2 = 0.999,
                                double eps = 1e-8) {
        AdamState s;
        s.m = ParamGrad::zeros_like(p);
        s.v = ParamGrad::zeros_like(p);
        s.beta1 = beta1;
        s.beta2 = beta2;
        s.eps = eps;
        return s;
    }
};

inline void adam_update(NetworkParams& theta, const ParamGrad& grad, AdamState& state, double lr) {
    if (lr <= 0) throw ConfigError("adam_update: learning rate must be positive");
    state.step += 1;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (int l = 0; l < theta.layers(); ++l) {
        state.m.w[l] = state.beta1 * state.m.w[l] + (1.0 - state.beta1) * grad.w[l];
        state.m.b[l] = state.beta1 * state.m.b[l] + (1.0 - state.beta1) * grad.b[l];
        state.v.w[l] = state.beta2 * state.v.w[l] +
                       (1.0 - state.beta2) * grad.w[l].cwiseProduct(grad.w[l]);
        state.v.b[l] = state.beta2 * state.v.b[l] +
                       (1.0 - state.beta2) * grad.b[l].cwiseProduct(grad.b[l]);
        const Eigen::MatrixXd mw = state.m.w[l] / c1;
        const Eigen::VectorXd mb = state.m.b[l] / c1;
        const Eigen::MatrixXd vw = state.v.w[l] / c2;
        const Eigen::VectorXd vb = state.v.b[l] / c2;
        theta.weights[l] -= lr * (mw.array() / (vw.array().sqrt() + state.eps)).matrix();
        theta.biases[l] -= lr * (mb.array() / (vb.array().sqrt() + state.eps)).matrix();
    }
}

}  // namespace srb
