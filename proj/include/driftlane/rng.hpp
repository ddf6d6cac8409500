#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace driftlane {

// Seeded random stream. All stochastic behavior in the library flows through
// declared seeds and this wrapper; distribution sampling is implemented here
// rather than with std:: distributions so that a (seed, call sequence) pair
// reproduces the same values on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    void reseed(std::uint64_t seed) {
        engine_.seed(seed);
        has_cached_normal_ = false;
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    // Standard normal via Marsaglia polar; one draw cached.
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        cached_normal_ = v * m;
        has_cached_normal_ = true;
        return u * m;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Knuth's product method; fine for the small rates used here.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double threshold = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > threshold);
        return k - 1;
    }

    // Bernoulli draw.
    bool flip(double p) { return uniform01() < p; }

    // Geometric dwell with the given mean, support {1, 2, ...}.
    std::int64_t geometric_dwell(double mean_slots) {
        if (mean_slots <= 1.0) return 1;
        const double p = 1.0 / mean_slots;
        // Inversion: ceil(ln(U) / ln(1-p)) has mean 1/p.
        const double u = 1.0 - uniform01(); // (0, 1]
        const double k = std::ceil(std::log(u) / std::log(1.0 - p));
        return k < 1.0 ? 1 : static_cast<std::int64_t>(k);
    }

private:
    std::mt19937_64 engine_;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

} // namespace driftlane
