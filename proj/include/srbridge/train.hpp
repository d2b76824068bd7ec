#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "srbridge/adam.hpp"
#include "srbridge/errors.hpp"
#include "srbridge/geometry.hpp"
#include "srbridge/losses.hpp"
#include "srbridge/paths.hpp"
#include "srbridge/rng.hpp"

namespace srb {

struct TrainingConfig {
    std::string geometry = "heisenberg";  // heisenberg | euclidean | custom-step2
    // geometry parameters
    int heis_pairs = 1;        // key "k"
    int eucl_dim = 1;          // key "d"
    double custom_alpha = 0.0;
    double custom_beta = 0.0;

    Point x0;
    double T = 1.0;
    int n = 100;
    int K = 64;
    int batches_per_epoch = 8;
    int epochs = 2500;
    LossKind loss_kind = LossKind::denoising_heisenberg;
    Scheme scheme = Scheme::heisenberg_exact;
    int K2 = 10;
    LevyMethod levy_method = LevyMethod::polynomial;
    double lr = 1e-3;
    std::uint64_t seed = 0;

    // network shape
    int hidden_layers = 3;
    int hidden_width = 15;
    Activation activation = Activation::elu;
};

struct LossReport {
    std::vector<double> epoch_loss;     // mean batch loss per epoch
    std::vector<double> epoch_seconds;  // wall clock per epoch
};

inline SubRiemannianModel model_from_config(const TrainingConfig& c) {
    if (c.geometry == "heisenberg") return heisenberg_model(c.heis_pairs);
    if (c.geometry == "euclidean") return euclidean_model(c.eucl_dim);
    if (c.geometry == "custom-step2") return custom_step2_model(c.custom_alpha, c.custom_beta);
    throw ConfigError("unknown geometry '" + c.geometry + "'");
}

inline void validate_training_config(const TrainingConfig& c, const SubRiemannianModel& m) {
    if (c.T <= 0 || c.n < 1 || c.K < 1 || c.batches_per_epoch < 1 || c.epochs < 0)
        throw ConfigError("training config: counts must be positive (epochs may be 0)");
    if (c.x0.size() != m.d) throw ConfigError("training config: x0 has wrong dimension");
    if (c.loss_kind == LossKind::denoising_heisenberg) {
        if (m.heisenberg_pairs < 1)
            throw ConfigError("denoising_heisenberg loss requires the heisenberg geometry");
        if (c.scheme != Scheme::heisenberg_exact)
            throw ConfigError("denoising_heisenberg loss requires scheme = heisenberg_exact");
    }
    if (c.loss_kind == LossKind::denoising_euclidean && c.scheme != Scheme::euler)
        throw ConfigError("denoising_euclidean loss requires scheme = euler");
    if (c.loss_kind == LossKind::denoising_general && c.scheme != Scheme::taylor)
        throw ConfigError("denoising_general loss requires scheme = taylor");
    if (c.loss_kind == LossKind::divergence && c.activation == Activation::relu)
        throw ConfigError("divergence loss requires a differentiable activation (elu)");
}

inline std::vector<int> network_sizes(const TrainingConfig& c, const SubRiemannianModel& m) {
    std::vector<int> sizes;
    sizes.push_back(m.d + 1);
    for (int l = 0; l < c.hidden_layers; ++l) sizes.push_back(c.hidden_width);
    sizes.push_back(m.k);
    return sizes;
}

// Algorithm-1 style loop: sample a fresh batch, evaluate the configured loss,
// backpropagate, Adam step. Deterministic for a fixed config and seed.
inline std::pair<NetworkParams, LossReport> train(const TrainingConfig& c) {
    const SubRiemannianModel model = model_from_config(c);
    validate_training_config(c, model);

    RngStream root(c.seed);
    NetworkParams theta =
        init_network(network_sizes(c, model), c.activation, root.derive(stream_label::weights_init));
    AdamState adam = AdamState::for_params(theta);
    RngStream batches = root.derive(stream_label::train_batches);

    LossReport report;
    report.epoch_loss.reserve(c.epochs);
    report.epoch_seconds.reserve(c.epochs);

    for (int epoch = 0; epoch < c.epochs; ++epoch) {
        const auto tick = std::chrono::steady_clock::now();
        double epoch_sum = 0.0;
        for (int b = 0; b < c.batches_per_epoch; ++b) {
            const std::uint64_t iter =
                static_cast<std::uint64_t>(epoch) * c.batches_per_epoch + b;
            PathBatch batch = sample_batch(model, c.x0, c.T, c.n, c.K, batches.derive(iter),
                                           c.scheme, c.K2, c.levy_method);
            std::pair<double, ParamGrad> vg;
            switch (c.loss_kind) {
                case LossKind::divergence:
                    vg = divergence_loss_grad(model, theta, batch);
                    break;
                case LossKind::denoising_euclidean:
                    vg = denoising_loss_euclideanized_grad(theta, batch);
                    break;
                case LossKind::denoising_heisenberg:
                    vg = heisenberg_denoising_loss_grad(theta, batch);
                    break;
                case LossKind::denoising_general:
                    vg = general_denoising_loss_grad(model, theta, batch);
                    break;
            }
            if (!std::isfinite(vg.first) || !vg.second.all_finite())
                throw NumericError("train: non-finite loss/gradient at epoch " +
                                   std::to_string(epoch) + ", batch " + std::to_string(b));
            adam_update(theta, vg.second, adam, c.lr);
            epoch_sum += vg.first;
        }
        const auto tock = std::chrono::steady_clock::now();
        report.epoch_loss.push_back(epoch_sum / c.batches_per_epoch);
        report.epoch_seconds.push_back(std::chrono::duration<double>(tock - tick).count());
    }
    return {std::move(theta), std::move(report)};
}

}  // namespace srb
