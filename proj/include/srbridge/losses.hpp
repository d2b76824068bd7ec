#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numbers>
#include <vector>

#include "srbridge/errors.hpp"
#include "srbridge/geometry.hpp"
#include "srbridge/network.hpp"
#include "srbridge/paths.hpp"
#include "srbridge/reduce.hpp"
#include "srbridge/score_field.hpp"

namespace srb {

enum class LossKind { divergence, denoising_euclidean, denoising_heisenberg, denoising_general };

inline LossKind loss_kind_from_string(const std::string& s) {
    if (s == "divergence") return LossKind::divergence;
    if (s == "denoising_euclidean") return LossKind::denoising_euclidean;
    if (s == "denoising_heisenberg") return LossKind::denoising_heisenberg;
    if (s == "denoising_general") return LossKind::denoising_general;
    throw ConfigError("unknown loss '" + s + "'");
}

namespace detail {

// Losses walk paths in path_id order so the value is a function of the path
// set alone, not of storage order.
inline std::vector<const PathSample*> canonical_order(const PathBatch& batch) {
    if (batch.empty()) throw ConfigError("loss: empty batch");
    std::vector<const PathSample*> ptr;
    ptr.reserve(batch.size());
    for (const auto& p : batch) ptr.push_back(&p);
    std::sort(ptr.begin(), ptr.end(),
              [](const PathSample* a, const PathSample* b) { return a->path_id < b->path_id; });
    return ptr;
}

inline void require_elu_for_divergence(Activation a) {
    if (a == Activation::relu)
        throw ConfigError("divergence loss requires a differentiable activation (elu)");
}

}  // namespace detail

// div_{dx} S^theta at (t, x): sum_j [ S^j (div sigma_j) + (J sigma_j)_j ].
inline double divergence_of_score(const SubRiemannianModel& m, const ScoreField& S, double t,
                                  const Point& x) {
    const HorizontalCoeffs s = S.eval(t, x);
    const Eigen::MatrixXd J = S.jacobian(t, x);
    const Eigen::MatrixXd sigma = m.frame(x);
    const Eigen::VectorXd div = frame_divergences(m, x);
    double out = s.dot(div);
    for (int j = 0; j < m.k; ++j) out += J.row(j).dot(sigma.col(j));
    return out;
}

inline double divergence_of_score(const SubRiemannianModel& m, const NetworkParams& theta,
                                  double t, const Point& x) {
    detail::require_elu_for_divergence(theta.activation);
    return divergence_of_score(m, network_score_field(theta), t, x);
}

// Sample approximation of the divergence-form loss:
//   (delta/K) sum_l sum_{i=1..n} [ |S_{i d}(X_i)|^2 + 2 div S_{i d}(X_i) ].
inline double divergence_loss(const SubRiemannianModel& m, const ScoreField& S,
                              const PathBatch& batch) {
    const auto paths = detail::canonical_order(batch);
    const double delta = paths.front()->delta();
    std::vector<double> partial(paths.size());
    for (std::size_t l = 0; l < paths.size(); ++l) {
        const PathSample& p = *paths[l];
        double acc = 0.0;
        for (int i = 1; i <= p.steps(); ++i) {
            const double t = p.times[i];
            const HorizontalCoeffs s = S.eval(t, p.states[i]);
            acc += s.squaredNorm() + 2.0 * divergence_of_score(m, S, t, p.states[i]);
        }
        partial[l] = acc;
    }
    return delta / static_cast<double>(paths.size()) * tree_sum(std::move(partial));
}

inline double divergence_loss(const SubRiemannianModel& m, const NetworkParams& theta,
                              const PathBatch& batch) {
    detail::require_elu_for_divergence(theta.activation);
    return divergence_loss(m, network_score_field(theta), batch);
}

namespace detail {

// Shared shape of the three denoising losses:
//   (1/K) sum_l sum_i < S_{i d}(X_i), delta S_{i d}(X_i) - 2 target_{l,i} >.
// Targets are theta-independent, so gradients flow only through S.
struct DenoisingBatch {
    std::vector<EvalPoint> points;       // canonical (path_id, step) order
    std::vector<Eigen::VectorXd> target;
    std::vector<std::size_t> path_begin;  // per path, index of first point
    double delta = 0.0;
    int K = 0;
};

inline double denoising_value(const ScoreField& S, const DenoisingBatch& b) {
    std::vector<double> partial;
    partial.reserve(b.path_begin.size());
    for (std::size_t l = 0; l < b.path_begin.size(); ++l) {
        const std::size_t lo = b.path_begin[l];
        const std::size_t hi = (l + 1 < b.path_begin.size()) ? b.path_begin[l + 1] : b.points.size();
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const HorizontalCoeffs s = S.eval(b.points[i].t, b.points[i].x);
            acc += s.dot(b.delta * s - 2.0 * b.target[i]);
        }
        partial.push_back(acc);
    }
    return tree_sum(std::move(partial)) / b.K;
}

inline std::pair<double, ParamGrad> denoising_value_grad(const NetworkParams& theta,
                                                         const DenoisingBatch& b) {
    const int B = static_cast<int>(b.points.size());
    Eigen::MatrixXd inputs(theta.input_dim(), B);
    for (int i = 0; i < B; ++i) inputs.col(i) = network_input(b.points[i].t, b.points[i].x);
    nn::BatchTrace tr;
    const Eigen::MatrixXd& out = nn::forward_batch(theta, inputs, tr);

    // per-path partial values, tree-reduced for storage-order invariance
    std::vector<double> partial;
    partial.reserve(b.path_begin.size());
    for (std::size_t l = 0; l < b.path_begin.size(); ++l) {
        const std::size_t lo = b.path_begin[l];
        const std::size_t hi = (l + 1 < b.path_begin.size()) ? b.path_begin[l + 1] : b.points.size();
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto s = out.col(static_cast<int>(i));
            acc += s.dot(b.delta * s - 2.0 * b.target[i]);
        }
        partial.push_back(acc);
    }
    const double value = tree_sum(std::move(partial)) / b.K;
    if (!std::isfinite(value)) throw NumericError("denoising loss: non-finite value");

    Eigen::MatrixXd dY(out.rows(), out.cols());
    for (int i = 0; i < B; ++i)
        dY.col(i) = (2.0 * b.delta * out.col(i) - 2.0 * b.target[i]) / b.K;
    ParamGrad grad = ParamGrad::zeros_like(theta);
    nn::backward_batch(theta, tr, std::move(dY), grad);
    return {value, std::move(grad)};
}

inline DenoisingBatch euclidean_targets(const PathBatch& batch) {
    const auto paths = canonical_order(batch);
    DenoisingBatch b;
    b.K = static_cast<int>(paths.size());
    b.delta = paths.front()->delta();
    for (const PathSample* p : paths) {
        if (p->increments.empty()) throw ConfigError("denoising loss: batch carries no increments");
        b.path_begin.push_back(b.points.size());
        for (int i = 1; i <= p->steps(); ++i) {
            b.points.push_back({p->times[i], p->states[i]});
            b.target.push_back(-p->increments[i - 1].dW);
        }
    }
    return b;
}

// Target for the Heisenberg loss: S_hat(q) = -[(x;y) + pi sgn(z)(-y;x)]
// evaluated at the group increment q = Delta_i X = (dW, summed area).
inline Eigen::VectorXd heis_target(const StepIncrement& inc) {
    const int pairs = static_cast<int>(inc.dW.size()) / 2;
    const double s = sgn(inc.heisenberg_area());
    Eigen::VectorXd t(2 * pairs);
    for (int j = 0; j < pairs; ++j) {
        t(j) = -(inc.dW(j) - std::numbers::pi * s * inc.dW(pairs + j));
        t(pairs + j) = -(inc.dW(pairs + j) + std::numbers::pi * s * inc.dW(j));
    }
    return t;
}

inline DenoisingBatch heisenberg_targets(const PathBatch& batch) {
    const auto paths = canonical_order(batch);
    DenoisingBatch b;
    b.K = static_cast<int>(paths.size());
    b.delta = paths.front()->delta();
    for (const PathSample* p : paths) {
        if (!p->states.empty() && p->states[0].size() % 2 == 0)
            throw ConfigError("heisenberg denoising loss: states are not Heisenberg coordinates");
        b.path_begin.push_back(b.points.size());
        for (int i = 1; i <= p->steps(); ++i) {
            const StepIncrement& inc = p->increments[i - 1];
            if (inc.dW.size() % 2 != 0 || inc.dW.size() + 1 != p->states[i].size())
                throw ConfigError("heisenberg denoising loss: geometry mismatch");
            b.points.push_back({p->times[i], p->states[i]});
            b.target.push_back(heis_target(inc));
        }
    }
    return b;
}

// General step-2 target: delta * S_hat_delta(X_{i-1}, X_i) with the adapted
// chart re-centred at the previous state each step.
inline DenoisingBatch general_targets(const SubRiemannianModel& m, const PathBatch& batch) {
    const auto paths = canonical_order(batch);
    DenoisingBatch b;
    b.K = static_cast<int>(paths.size());
    b.delta = paths.front()->delta();
    for (const PathSample* p : paths) {
        b.path_begin.push_back(b.points.size());
        for (int i = 1; i <= p->steps(); ++i) {
            const AdaptedChart chart = adapted_chart(m, p->states[i - 1]);
            b.points.push_back({p->times[i], p->states[i]});
            b.target.push_back(b.delta * approx_score(m, chart, p->states[i], b.delta));
        }
    }
    return b;
}

}  // namespace detail

// Euler-step denoising loss (1/K) sum < S, delta S + 2 dW >.
inline double denoising_loss_euclideanized(const ScoreField& S, const PathBatch& batch) {
    return detail::denoising_value(S, detail::euclidean_targets(batch));
}
inline std::pair<double, ParamGrad> denoising_loss_euclideanized_grad(const NetworkParams& theta,
                                                                      const PathBatch& batch) {
    return detail::denoising_value_grad(theta, detail::euclidean_targets(batch));
}

// Heisenberg exact-step denoising loss (1/K) sum < S, delta S - 2 S_hat(DX) >.
inline double heisenberg_denoising_loss(const ScoreField& S, const PathBatch& batch) {
    return detail::denoising_value(S, detail::heisenberg_targets(batch));
}
inline std::pair<double, ParamGrad> heisenberg_denoising_loss_grad(const NetworkParams& theta,
                                                                   const PathBatch& batch) {
    return detail::denoising_value_grad(theta, detail::heisenberg_targets(batch));
}

// Adapted-coordinate denoising loss for step-2 models driven by the Taylor
// scheme; reduces to the Euclideanized loss when all weights are 1.
inline double general_denoising_loss(const SubRiemannianModel& m, const ScoreField& S,
                                     const PathBatch& batch) {
    return detail::denoising_value(S, detail::general_targets(m, batch));
}
inline std::pair<double, ParamGrad> general_denoising_loss_grad(const SubRiemannianModel& m,
                                                                const NetworkParams& theta,
                                                                const PathBatch& batch) {
    return detail::denoising_value_grad(theta, detail::general_targets(m, batch));
}

// Convenience overloads on the network.
inline double denoising_loss_euclideanized(const NetworkParams& theta, const PathBatch& batch) {
    return denoising_loss_euclideanized(network_score_field(theta), batch);
}
inline double heisenberg_denoising_loss(const NetworkParams& theta, const PathBatch& batch) {
    return heisenberg_denoising_loss(network_score_field(theta), batch);
}
inline double general_denoising_loss(const SubRiemannianModel& m, const NetworkParams& theta,
                                     const PathBatch& batch) {
    return general_denoising_loss(m, network_score_field(theta), batch);
}

// Divergence loss with its exact parameter gradient. The divergence term
// needs d/dtheta of input derivatives of the network, done by reverse-mode
// transport through one forward-mode pass per frame direction.
inline std::pair<double, ParamGrad> divergence_loss_grad(const SubRiemannianModel& m,
                                                         const NetworkParams& theta,
                                                         const PathBatch& batch) {
    detail::require_elu_for_divergence(theta.activation);
    const auto paths = detail::canonical_order(batch);
    const double delta = paths.front()->delta();
    const int K = static_cast<int>(paths.size());

    std::vector<EvalPoint> pts;
    std::vector<std::size_t> path_begin;
    for (const PathSample* p : paths) {
        path_begin.push_back(pts.size());
        for (int i = 1; i <= p->steps(); ++i) pts.push_back({p->times[i], p->states[i]});
    }
    const int B = static_cast<int>(pts.size());
    const int d = m.d;

    Eigen::MatrixXd inputs(theta.input_dim(), B);
    for (int i = 0; i < B; ++i) inputs.col(i) = network_input(pts[i].t, pts[i].x);
    nn::BatchTrace tr;
    const Eigen::MatrixXd& out = nn::forward_batch(theta, inputs, tr);

    // frame data per point
    std::vector<Eigen::MatrixXd> sigmas(B);
    Eigen::MatrixXd divs(m.k, B);
    for (int i = 0; i < B; ++i) {
        sigmas[i] = m.frame(pts[i].x);
        divs.col(i) = frame_divergences(m, pts[i].x);
    }

    // tangent passes, one per frame direction
    std::vector<nn::TangentTrace> tts(m.k);
    Eigen::MatrixXd vdot = Eigen::MatrixXd::Zero(d + 1, B);
    std::vector<Eigen::MatrixXd> jac_sigma(m.k);  // zdot_L per direction, k x B
    for (int j = 0; j < m.k; ++j) {
        for (int i = 0; i < B; ++i) {
            vdot(0, i) = 0.0;
            vdot.block(1, i, d, 1) = sigmas[i].col(j);
        }
        jac_sigma[j] = nn::tangent_forward(theta, tr, vdot, tts[j]);
    }

    // per-path values: |S|^2 + 2 (S . div sigma) + 2 sum_j (J sigma_j)_j
    std::vector<double> partial;
    partial.reserve(paths.size());
    for (std::size_t l = 0; l < path_begin.size(); ++l) {
        const std::size_t lo = path_begin[l];
        const std::size_t hi = (l + 1 < path_begin.size()) ? path_begin[l + 1] : pts.size();
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const int ci = static_cast<int>(i);
            acc += out.col(ci).squaredNorm() + 2.0 * out.col(ci).dot(divs.col(ci));
            for (int j = 0; j < m.k; ++j) acc += 2.0 * jac_sigma[j](j, ci);
        }
        partial.push_back(acc);
    }
    const double scale = delta / K;
    const double value = scale * tree_sum(std::move(partial));
    if (!std::isfinite(value)) throw NumericError("divergence loss: non-finite value");

    ParamGrad grad = ParamGrad::zeros_like(theta);
    Eigen::MatrixXd dY = scale * (2.0 * out + 2.0 * divs);
    Eigen::MatrixXd dYdot = Eigen::MatrixXd::Zero(out.rows(), B);
    for (int j = 0; j < m.k; ++j) {
        dYdot.setZero();
        dYdot.row(j).setConstant(2.0 * scale);
        // primal adjoint rides along on the first branch only
        nn::tangent_backward(theta, tr, tts[j],
                             j == 0 ? dY : Eigen::MatrixXd::Zero(out.rows(), B), dYdot, grad);
    }
    return {value, std::move(grad)};
}

}  // namespace srb
