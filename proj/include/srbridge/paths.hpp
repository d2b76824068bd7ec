#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "srbridge/errors.hpp"
#include "srbridge/geometry.hpp"
#include "srbridge/heisenberg.hpp"
#include "srbridge/increments.hpp"
#include "srbridge/reduce.hpp"
#include "srbridge/rng.hpp"

namespace srb {

enum class Scheme { euler, taylor, heisenberg_exact };

inline Scheme scheme_from_string(const std::string& s) {
    if (s == "euler") return Scheme::euler;
    if (s == "taylor") return Scheme::taylor;
    if (s == "heisenberg_exact") return Scheme::heisenberg_exact;
    throw ConfigError("unknown scheme '" + s + "' (euler|taylor|heisenberg_exact)");
}

// One sampled trajectory on the uniform grid t_i = i T/n, with the noise that
// produced each step kept alongside (the denoising losses consume it).
struct PathSample {
    int path_id = 0;
    std::vector<double> times;            // n+1
    std::vector<Point> states;            // n+1, states[0] = x0
    std::vector<StepIncrement> increments;  // n; increments[i] produced states[i+1]

    int steps() const { return static_cast<int>(increments.size()); }
    double delta() const { return increments.empty() ? 0.0 : increments.front().delta; }
};

using PathBatch = std::vector<PathSample>;

namespace detail {

inline void check_state(const Point& x, int step, const char* what) {
    if (!x.allFinite())
        throw NumericError(std::string(what) + ": path diverged at step " + std::to_string(step));
}

inline std::vector<double> uniform_grid(double T, int n) {
    std::vector<double> t(n + 1);
    const double delta = T / n;
    for (int i = 0; i <= n; ++i) t[i] = delta * i;
    return t;
}

}  // namespace detail

// Euler-Maruyama: X_{i+1} = X_i + sigma(X_i) dW_i + tau_0(X_i) delta.
inline PathSample euler_maruyama_path(const SubRiemannianModel& m, const Point& x0, double T,
                                      int n, RngStream rng) {
    if (n < 1) throw ConfigError("euler_maruyama_path: need n >= 1");
    if (T <= 0) throw ConfigError("euler_maruyama_path: need T > 0");
    PathSample p;
    p.times = detail::uniform_grid(T, n);
    p.states.reserve(n + 1);
    p.increments.reserve(n);
    p.states.push_back(x0);
    const double delta = T / n;
    for (int i = 0; i < n; ++i) {
        RngStream step_rng = rng.derive(static_cast<std::uint64_t>(i));
        StepIncrement inc = sample_brownian_increment(step_rng, m.k, delta);
        const Point& x = p.states.back();
        Point next = x + m.frame(x) * inc.dW + ito_drift(m, x) * delta;
        detail::check_state(next, i, "euler_maruyama_path");
        p.states.push_back(std::move(next));
        p.increments.push_back(std::move(inc));
    }
    return p;
}

// Single gamma = 1 stochastic Taylor step for a step-2 model:
//   x + sigma dW + (1/2) sum nabla_{j1} sigma_{j2} dW^{j1} dW^{j2}
//     + sum_{j1<j2} [sigma_{j1}, sigma_{j2}] A^{j1,j2} + sigma_0 delta.
inline Point taylor_step(const SubRiemannianModel& m, const Point& x, const StepIncrement& inc) {
    if (inc.dW.size() != m.k) throw ConfigError("taylor_step: increment dimension mismatch");
    const Eigen::MatrixXd sigma = m.frame(x);
    const auto conn = connection_table(m, x);
    Point next = x + sigma * inc.dW + stratonovich_drift(m, x) * inc.delta;
    for (int j1 = 0; j1 < m.k; ++j1)
        for (int j2 = 0; j2 < m.k; ++j2)
            next += 0.5 * inc.dW(j1) * inc.dW(j2) * conn[j1][j2];
    for (int j1 = 0; j1 < m.k; ++j1)
        for (int j2 = j1 + 1; j2 < m.k; ++j2)
            next += inc.levy(j1, j2) * (conn[j1][j2] - conn[j2][j1]);
    detail::check_state(next, -1, "taylor_step");
    return next;
}

inline PathSample taylor_path(const SubRiemannianModel& m, const Point& x0, double T, int n,
                              int K2, LevyMethod method, RngStream rng) {
    if (n < 1) throw ConfigError("taylor_path: need n >= 1");
    PathSample p;
    p.times = detail::uniform_grid(T, n);
    p.states.reserve(n + 1);
    p.increments.reserve(n);
    p.states.push_back(x0);
    const double delta = T / n;
    for (int i = 0; i < n; ++i) {
        RngStream step_rng = rng.derive(static_cast<std::uint64_t>(i));
        StepIncrement inc = sample_increment(step_rng, m.k, delta, K2, method);
        Point next = taylor_step(m, p.states.back(), inc);
        detail::check_state(next, i, "taylor_path");
        p.states.push_back(std::move(next));
        p.increments.push_back(std::move(inc));
    }
    return p;
}

// Exact-in-law Heisenberg path via the group law; states are flat (x, y, z).
inline PathSample heisenberg_exact_path(const SubRiemannianModel& m, const Point& x0, double T,
                                        int n, int K2, LevyMethod method, RngStream rng) {
    if (m.heisenberg_pairs < 1)
        throw ConfigError("heisenberg_exact scheme requires the heisenberg geometry");
    if (n < 1) throw ConfigError("heisenberg_exact_path: need n >= 1");
    PathSample p;
    p.times = detail::uniform_grid(T, n);
    p.states.reserve(n + 1);
    p.increments.reserve(n);
    p.states.push_back(x0);
    heis::HeisPoint q = heis::HeisPoint::from_flat(x0);
    const double delta = T / n;
    for (int i = 0; i < n; ++i) {
        RngStream step_rng = rng.derive(static_cast<std::uint64_t>(i));
        StepIncrement inc = sample_increment(step_rng, m.k, delta, K2, method);
        q = heis::heis_step(q, inc.dW, inc.heisenberg_area());
        Point next = q.flat();
        detail::check_state(next, i, "heisenberg_exact_path");
        p.states.push_back(std::move(next));
        p.increments.push_back(std::move(inc));
    }
    return p;
}

// K independent paths with per-path substreams; deterministic in
// (seed, scheme, parameters) regardless of evaluation order.
inline PathBatch sample_batch(const SubRiemannianModel& m, const Point& x0, double T, int n,
                              int K, RngStream rng, Scheme scheme, int K2 = 10,
                              LevyMethod method = LevyMethod::polynomial) {
    if (K < 1) throw ConfigError("sample_batch: need K >= 1");
    std::function<PathSample(std::size_t)> make = [&](std::size_t l) {
        RngStream path_rng = rng.derive(static_cast<std::uint64_t>(l));
        PathSample p;
        switch (scheme) {
            case Scheme::euler:
                p = euler_maruyama_path(m, x0, T, n, path_rng);
                break;
            case Scheme::taylor:
                p = taylor_path(m, x0, T, n, K2, method, path_rng);
                break;
            case Scheme::heisenberg_exact:
                p = heisenberg_exact_path(m, x0, T, n, K2, method, path_rng);
                break;
        }
        p.path_id = static_cast<int>(l);
        return p;
    };
    return indexed_map<PathSample>(static_cast<std::size_t>(K), make);
}

}  // namespace srb
