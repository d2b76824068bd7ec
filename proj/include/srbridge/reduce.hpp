#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace srb {

// Pairwise tree reduction over v[0..n). The bracketing depends only on n and
// the element order, never on thread count, so results are bit-reproducible.
template <class T, class Plus>
T tree_reduce(std::vector<T> v, Plus plus) {
    if (v.empty()) return T{};
    std::size_t n = v.size();
    while (n > 1) {
        std::size_t half = n / 2;
        for (std::size_t i = 0; i < half; ++i) {
            v[i] = plus(std::move(v[2 * i]), std::move(v[2 * i + 1]));
        }
        if (n % 2 == 1) {
            v[half] = std::move(v[n - 1]);
            n = half + 1;
        } else {
            n = half;
        }
    }
    return std::move(v[0]);
}

inline double tree_sum(std::vector<double> v) {
    return tree_reduce(std::move(v), [](double a, double b) { return a + b; });
}

// Runs fn(i) for i in [0, n) and collects results by index. Work items may be
// spread over threads; outputs land in index order, so downstream reductions
// stay deterministic.
template <class T>
std::vector<T> indexed_map(std::size_t n, const std::function<T(std::size_t)>& fn,
                           unsigned threads = 0) {
    std::vector<T> out(n);
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    if (threads > n) threads = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += threads) out[i] = fn(i);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace srb
