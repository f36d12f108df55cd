#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, stream, counter), so worker substreams are independent and a run
// is reproducible regardless of thread scheduling.

#include <cmath>
#include <complex>
#include <cstdint>

namespace lab {

inline uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    Rng(uint64_t seed, uint64_t stream = 0)
        : base_(mix64(seed ^ 0x853C49E6748FEA9BULL) ^ mix64(stream * 0xDA942042E4DD58B5ULL + 1)) {}

    uint64_t next_u64() { return mix64(base_ + 0x9E3779B97F4A7C15ULL * (++counter_)); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
    }

    // Box-Muller; consumes two uniforms per call, no cached state.
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    std::complex<double> cnormal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925287 * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

private:
    uint64_t base_;
    uint64_t counter_ = 0;
};

}  // namespace lab
