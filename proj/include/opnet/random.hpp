#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace opnet {

/// Seeded random source. Wraps mt19937_64 and draws every variate with
/// explicit arithmetic so trajectories do not depend on the standard
/// library's distribution implementations.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) {
        // Lemire's multiply-shift with rejection
        __extension__ typedef unsigned __int128 u128;
        u128 m = static_cast<u128>(engine_()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<u128>(engine_()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Exponential with unit rate.
    double exponential() { return -std::log1p(-uniform01()); }

    /// Number of arrivals of a unit-rate Poisson process on [0, mean).
    std::uint64_t poisson(double mean) {
        std::uint64_t count = 0;
        double clock = exponential();
        while (clock < mean) {
            ++count;
            clock += exponential();
        }
        return count;
    }

private:
    engine_type engine_;
};

/// splitmix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for a named sub-stream of a run seed.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(seed ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

} // namespace opnet
