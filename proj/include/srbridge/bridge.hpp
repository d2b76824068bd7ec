#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "srbridge/errors.hpp"
#include "srbridge/geometry.hpp"
#include "srbridge/paths.hpp"
#include "srbridge/reduce.hpp"
#include "srbridge/rng.hpp"
#include "srbridge/score_field.hpp"

namespace srb {

struct BridgeConfig {
    Point x0;         // conditioning start; base point of the score
    Point xT;         // conditioning endpoint; the reverse simulation starts here
    double T = 1.0;
    int n = 100;
    int num_samples = 100;
    ScoreField score;
};

// Quartile curves of a scalar statistic over an ensemble.
struct SummaryCurves {
    std::vector<double> q25, q50, q75;
};

struct EnsembleSummary {
    SummaryCurves horizontal;  // |(x, y)| for Heisenberg, |first k coords| otherwise
    SummaryCurves vertical;    // z for Heisenberg, |remaining coords| otherwise
};

struct BridgeEnsemble {
    std::vector<double> times;  // forward grid, x0 side at t = 0
    PathBatch paths;            // flipped to forward time
    EnsembleSummary summary;
};

// Drift of the time-reversed bridge at reverse time t (state at time t, score
// evaluated at T - t):
//   Stratonovich: (1/2) sum (div sigma_j) sigma_j - Z + sum s^j sigma_j
//   Ito adds (1/2) sum nabla_{sigma_j} sigma_j.
inline Point reverse_bridge_drift(const SubRiemannianModel& m, const ScoreField& score, double t,
                                  const Point& x, double T, bool ito = false) {
    if (t >= T) throw ConfigError("reverse_bridge_drift: t must be below T");
    const Eigen::MatrixXd sigma = m.frame(x);
    const Eigen::VectorXd div = frame_divergences(m, x);
    const HorizontalCoeffs s = score.eval(T - t, x);
    if (!s.allFinite()) throw NumericError("reverse_bridge_drift: non-finite score");
    Point b = 0.5 * (sigma * div) - m.drift_at(x) + sigma * s;
    if (ito) {
        const FrameJacobian J = frame_derivatives(m, x);
        for (int j = 0; j < m.k; ++j) b += 0.5 * (J[j] * sigma.col(j));
    }
    return b;
}

namespace detail {

// Linear-interpolation percentile, p in [0, 1].
inline double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    const double h = p * (static_cast<double>(v.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

// Pointwise 25/50/75 percentile curves of the coordinate-group statistics on
// a common time grid. split is the number of leading coordinates in the
// horizontal group; signed_vertical reports the last coordinate itself
// (Heisenberg z) instead of the norm of the trailing group.
inline EnsembleSummary ensemble_stats(const PathBatch& paths, int split, bool signed_vertical) {
    if (paths.empty()) throw ConfigError("ensemble_stats: empty ensemble");
    const std::size_t npts = paths.front().states.size();
    const int d = static_cast<int>(paths.front().states.front().size());
    for (const PathSample& p : paths)
        if (p.states.size() != npts) throw ConfigError("ensemble_stats: paths on different grids");
    EnsembleSummary s;
    for (std::size_t i = 0; i < npts; ++i) {
        std::vector<double> hvals, vvals;
        hvals.reserve(paths.size());
        vvals.reserve(paths.size());
        for (const PathSample& p : paths) {
            const Point& x = p.states[i];
            hvals.push_back(x.head(split).norm());
            vvals.push_back(signed_vertical ? x(d - 1) : x.tail(d - split).norm());
        }
        s.horizontal.q25.push_back(detail::percentile(hvals, 0.25));
        s.horizontal.q50.push_back(detail::percentile(hvals, 0.50));
        s.horizontal.q75.push_back(detail::percentile(hvals, 0.75));
        s.vertical.q25.push_back(detail::percentile(vvals, 0.25));
        s.vertical.q50.push_back(detail::percentile(vvals, 0.50));
        s.vertical.q75.push_back(detail::percentile(vvals, 0.75));
    }
    return s;
}

// Reverses the time direction of every path; an involution on the arrays.
inline void flip_ensemble(BridgeEnsemble& e, int split, bool signed_vertical) {
    for (PathSample& p : e.paths) {
        std::reverse(p.states.begin(), p.states.end());
        std::reverse(p.increments.begin(), p.increments.end());
    }
    e.summary = ensemble_stats(e.paths, split, signed_vertical);
}

// Simulates the reversed bridge Ybar with Ybar_0 = xT by Euler-Maruyama with
// the Ito-form reverse drift, then flips so the reported paths run from the
// x0 end to the xT end. The score time argument stays at least delta/2 away
// from the T - t -> 0 singularity.
inline BridgeEnsemble sample_bridge(const SubRiemannianModel& m, const BridgeConfig& cfg,
                                    RngStream rng) {
    if (cfg.T <= 0 || cfg.n < 1 || cfg.num_samples < 1)
        throw ConfigError("bridge config: T, n, num_samples must be positive");
    if (cfg.xT.size() != m.d || cfg.x0.size() != m.d)
        throw ConfigError("bridge config: endpoint dimension mismatch");
    const double delta = cfg.T / cfg.n;

    std::function<PathSample(std::size_t)> simulate = [&](std::size_t l) {
        RngStream path_rng = rng.derive(static_cast<std::uint64_t>(l));
        PathSample p;
        p.path_id = static_cast<int>(l);
        p.times.resize(cfg.n + 1);
        for (int i = 0; i <= cfg.n; ++i) p.times[i] = delta * i;
        p.states.reserve(cfg.n + 1);
        p.states.push_back(cfg.xT);
        p.increments.reserve(cfg.n);
        for (int i = 0; i < cfg.n; ++i) {
            RngStream step_rng = path_rng.derive(static_cast<std::uint64_t>(i));
            StepIncrement inc = sample_brownian_increment(step_rng, m.k, delta);
            const Point& x = p.states.back();
            const double t = std::min(p.times[i], cfg.T - 0.5 * delta);
            Point next =
                x + m.frame(x) * inc.dW + reverse_bridge_drift(m, cfg.score, t, x, cfg.T, true) * delta;
            if (!next.allFinite())
                throw NumericError("sample_bridge: path diverged at step " + std::to_string(i));
            p.states.push_back(std::move(next));
            p.increments.push_back(std::move(inc));
        }
        // forward-time output: index 0 sits at the x0 end
        std::reverse(p.states.begin(), p.states.end());
        std::reverse(p.increments.begin(), p.increments.end());
        return p;
    };

    BridgeEnsemble e;
    e.times.resize(cfg.n + 1);
    for (int i = 0; i <= cfg.n; ++i) e.times[i] = delta * i;
    e.paths = indexed_map<PathSample>(static_cast<std::size_t>(cfg.num_samples), simulate);
    const int split = (m.heisenberg_pairs > 0) ? 2 * m.heisenberg_pairs : m.k;
    e.summary = ensemble_stats(e.paths, split, m.heisenberg_pairs > 0);
    return e;
}

}  // namespace srb
