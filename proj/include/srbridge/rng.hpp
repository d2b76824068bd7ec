#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "srbridge/errors.hpp"

namespace srb {

namespace detail {

// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2) + mix64(b)));
}

}  // namespace detail

// Seeded substream of the run-wide random source. A stream is identified by
// (seed, stream_id); derive() yields statistically independent child streams,
// so per-(path, step) substreams reproduce regardless of evaluation order.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id),
          engine_(detail::mix64(detail::mix64(seed), stream_id)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    RngStream derive(std::uint64_t label) const {
        return RngStream(seed_, detail::mix64(stream_id_, label));
    }

    // Uniform on (0, 1]; never returns 0 so log() below is safe.
    double uniform01() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller with a cached spare. Deterministic for a
    // fixed (seed, stream_id) and draw sequence.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double gaussian(double stddev) { return stddev * gaussian(); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Fixed substream labels; all randomness in the artifact flows from one seed
// through these.
namespace stream_label {
inline constexpr std::uint64_t weights_init = 0x01;
inline constexpr std::uint64_t train_batches = 0x02;
inline constexpr std::uint64_t simulate = 0x03;
inline constexpr std::uint64_t bridge = 0x04;
}  // namespace stream_label

}  // namespace srb
