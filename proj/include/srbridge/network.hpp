#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "srbridge/errors.hpp"
#include "srbridge/geometry.hpp"
#include "srbridge/rng.hpp"

namespace srb {

enum class Activation { elu, relu };

inline Activation activation_from_string(const std::string& s) {
    if (s == "elu") return Activation::elu;
    if (s == "relu") return Activation::relu;
    throw ConfigError("unknown activation '" + s + "' (elu|relu)");
}

inline std::string to_string(Activation a) { return a == Activation::elu ? "elu" : "relu"; }

// Dense feed-forward score network S^theta(t, x): input is t prepended to the
// coordinates, hidden layers share one activation, the output layer is linear
// and has width k (frame coefficients).
struct NetworkParams {
    std::vector<int> layer_sizes;          // {d+1, hidden..., k}
    std::vector<Eigen::MatrixXd> weights;  // out x in per layer
    std::vector<Eigen::VectorXd> biases;
    Activation activation = Activation::elu;

    int layers() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
};

// Gradient (or any tangent) with theta's shape.
struct ParamGrad {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;

    static ParamGrad zeros_like(const NetworkParams& p) {
        ParamGrad g;
        g.w.reserve(p.layers());
        g.b.reserve(p.layers());
        for (int l = 0; l < p.layers(); ++l) {
            g.w.emplace_back(Eigen::MatrixXd::Zero(p.weights[l].rows(), p.weights[l].cols()));
            g.b.emplace_back(Eigen::VectorXd::Zero(p.biases[l].size()));
        }
        return g;
    }

    ParamGrad& operator+=(const ParamGrad& o) {
        for (std::size_t l = 0; l < w.size(); ++l) {
            w[l] += o.w[l];
            b[l] += o.b[l];
        }
        return *this;
    }

    ParamGrad& operator*=(double s) {
        for (std::size_t l = 0; l < w.size(); ++l) {
            w[l] *= s;
            b[l] *= s;
        }
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (std::size_t l = 0; l < w.size(); ++l) {
            m = std::max(m, w[l].cwiseAbs().maxCoeff());
            m = std::max(m, b[l].cwiseAbs().maxCoeff());
        }
        return m;
    }

    bool all_finite() const {
        for (std::size_t l = 0; l < w.size(); ++l)
            if (!w[l].allFinite() || !b[l].allFinite()) return false;
        return true;
    }
};

// He-style fan-in scaled uniform weights, zero biases.
inline NetworkParams init_network(const std::vector<int>& layer_sizes, Activation act,
                                  RngStream rng) {
    if (layer_sizes.size() < 3) throw ConfigError("init_network: need at least one hidden layer");
    for (int s : layer_sizes)
        if (s < 1) throw ConfigError("init_network: layer sizes must be positive");
    NetworkParams p;
    p.layer_sizes = layer_sizes;
    p.activation = act;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l], out = layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / in);
        Eigen::MatrixXd W(out, in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) W(r, c) = bound * (2.0 * rng.uniform01() - 1.0);
        p.weights.push_back(std::move(W));
        p.biases.emplace_back(Eigen::VectorXd::Zero(out));
    }
    return p;
}

namespace nn {

inline double act_value(Activation a, double v) {
    if (a == Activation::relu) return v > 0 ? v : 0.0;
    return v > 0 ? v : std::expm1(v);
}
inline double act_deriv(Activation a, double v) {
    if (a == Activation::relu) return v > 0 ? 1.0 : 0.0;
    return v > 0 ? 1.0 : std::exp(v);
}
inline double act_second(Activation a, double v) {
    if (a == Activation::relu) return 0.0;
    return v > 0 ? 0.0 : std::exp(v);
}

// Forward pass over a batch of inputs (columns). a[l] are pre-activations,
// z[l] the layer inputs with z[0] the network input; z[L] is the output.
struct BatchTrace {
    std::vector<Eigen::MatrixXd> a;
    std::vector<Eigen::MatrixXd> z;
};

inline const Eigen::MatrixXd& forward_batch(const NetworkParams& p, const Eigen::MatrixXd& inputs,
                                            BatchTrace& tr) {
    if (inputs.rows() != p.input_dim()) throw ConfigError("forward: input dimension mismatch");
    const int L = p.layers();
    tr.a.resize(L);
    tr.z.resize(L + 1);
    tr.z[0] = inputs;
    for (int l = 0; l < L; ++l) {
        tr.a[l].noalias() = p.weights[l] * tr.z[l];
        tr.a[l].colwise() += p.biases[l];
        if (l == L - 1) {
            tr.z[l + 1] = tr.a[l];
        } else {
            const Activation act = p.activation;
            tr.z[l + 1] = tr.a[l].unaryExpr([act](double v) { return act_value(act, v); });
        }
    }
    return tr.z[L];
}

// Reverse pass; dY is dLoss/dOutput per column. Accumulates into grad.
inline void backward_batch(const NetworkParams& p, const BatchTrace& tr, Eigen::MatrixXd dY,
                           ParamGrad& grad) {
    const int L = p.layers();
    for (int l = L - 1; l >= 0; --l) {
        if (l < L - 1) {
            const Activation act = p.activation;
            dY.array() *= tr.a[l].unaryExpr([act](double v) { return act_deriv(act, v); }).array();
        }
        grad.w[l].noalias() += dY * tr.z[l].transpose();
        grad.b[l] += dY.rowwise().sum();
        if (l > 0) dY = p.weights[l].transpose() * dY;
    }
}

// Forward-mode pass: propagates input tangents vdot through the primal trace.
struct TangentTrace {
    std::vector<Eigen::MatrixXd> adot;
    std::vector<Eigen::MatrixXd> zdot;
};

inline const Eigen::MatrixXd& tangent_forward(const NetworkParams& p, const BatchTrace& tr,
                                              const Eigen::MatrixXd& vdot, TangentTrace& tt) {
    const int L = p.layers();
    tt.adot.resize(L);
    tt.zdot.resize(L + 1);
    tt.zdot[0] = vdot;
    for (int l = 0; l < L; ++l) {
        tt.adot[l].noalias() = p.weights[l] * tt.zdot[l];
        if (l == L - 1) {
            tt.zdot[l + 1] = tt.adot[l];
        } else {
            const Activation act = p.activation;
            tt.zdot[l + 1] = tt.adot[l].array() *
                             tr.a[l].unaryExpr([act](double v) { return act_deriv(act, v); }).array();
        }
    }
    return tt.zdot[L];
}

// Reverse-over-forward: given adjoints of the primal output (dY) and of the
// tangent output (dYdot), accumulates the exact parameter gradient of a
// scalar depending on both. Pass dY only on one tangent branch per batch so
// primal contributions are not double counted.
inline void tangent_backward(const NetworkParams& p, const BatchTrace& tr, const TangentTrace& tt,
                             Eigen::MatrixXd dY, Eigen::MatrixXd dYdot, ParamGrad& grad) {
    const int L = p.layers();
    for (int l = L - 1; l >= 0; --l) {
        if (l < L - 1) {
            const Activation act = p.activation;
            const Eigen::ArrayXXd d1 = tr.a[l].unaryExpr([act](double v) { return act_deriv(act, v); }).array();
            const Eigen::ArrayXXd d2 = tr.a[l].unaryExpr([act](double v) { return act_second(act, v); }).array();
            // z = phi(a), zdot = phi'(a) adot:
            //   dL/da    = dz * phi'(a) + dzdot * phi''(a) * adot
            //   dL/dadot = dzdot * phi'(a)
            Eigen::MatrixXd da = (dY.array() * d1 + dYdot.array() * d2 * tt.adot[l].array()).matrix();
            dY.swap(da);
            dYdot.array() *= d1;
        }
        grad.w[l].noalias() += dY * tr.z[l].transpose();
        grad.w[l].noalias() += dYdot * tt.zdot[l].transpose();
        grad.b[l] += dY.rowwise().sum();
        if (l > 0) {
            dY = p.weights[l].transpose() * dY;
            dYdot = p.weights[l].transpose() * dYdot;
        }
    }
}

}  // namespace nn

inline Eigen::VectorXd network_input(double t, const Point& x) {
    Eigen::VectorXd u(x.size() + 1);
    u(0) = t;
    u.tail(x.size()) = x;
    return u;
}

// S^theta(t, x) as frame coefficients.
inline HorizontalCoeffs forward(const NetworkParams& p, double t, const Point& x) {
    nn::BatchTrace tr;
    return nn::forward_batch(p, network_input(t, x), tr).col(0);
}

// d S^{theta,j} / d x^i by forward-mode differentiation, time held fixed.
inline Eigen::MatrixXd input_jacobian(const NetworkParams& p, double t, const Point& x) {
    const int d = static_cast<int>(x.size());
    if (p.input_dim() != d + 1) throw ConfigError("input_jacobian: input dimension mismatch");
    nn::BatchTrace tr;
    nn::forward_batch(p, network_input(t, x), tr);
    Eigen::MatrixXd J(p.output_dim(), d);
    nn::TangentTrace tt;
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d + 1, 1);
    for (int i = 0; i < d; ++i) {
        v.setZero();
        v(1 + i, 0) = 1.0;
        J.col(i) = nn::tangent_forward(p, tr, v, tt).col(0);
    }
    return J;
}

// Exact reverse-mode gradient of a scalar loss of the network outputs over a
// batch of (t, x) evaluation points. The closure receives the k x B output
// matrix and must fill dL/dOutput with the same shape.
using BatchLossFn =
    std::function<double(const Eigen::MatrixXd& outputs, Eigen::MatrixXd& dL_doutputs)>;

struct EvalPoint {
    double t;
    Point x;
};

inline std::pair<double, ParamGrad> loss_gradient(const NetworkParams& p,
                                                  const std::vector<EvalPoint>& points,
                                                  const BatchLossFn& loss) {
    const int B = static_cast<int>(points.size());
    Eigen::MatrixXd inputs(p.input_dim(), B);
    for (int i = 0; i < B; ++i) inputs.col(i) = network_input(points[i].t, points[i].x);
    nn::BatchTrace tr;
    const Eigen::MatrixXd& out = nn::forward_batch(p, inputs, tr);
    Eigen::MatrixXd dY = Eigen::MatrixXd::Zero(out.rows(), out.cols());
    const double value = loss(out, dY);
    if (!std::isfinite(value)) throw NumericError("loss_gradient: non-finite loss value");
    ParamGrad grad = ParamGrad::zeros_like(p);
    nn::backward_batch(p, tr, std::move(dY), grad);
    return {value, std::move(grad)};
}

// ---------------------------------------------------------------------------
// Serialization (JSON, format version 1)
// ---------------------------------------------------------------------------

}  // namespace srb
