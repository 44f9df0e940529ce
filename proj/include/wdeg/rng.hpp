#pragma once

#include <cstdint>
#include <cmath>

#include "wdeg/vec.hpp"

namespace wdeg {

/// Deterministic 64-bit generator (xorshift-multiply a.k.a. splitmix64).
/// Used instead of <random> engines+distributions so that sample streams
/// are reproducible bit-for-bit across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // decorrelate trivially related seeds
        next_u64();
        next_u64();
    }

    /// Derive an independent stream for a worker/block index.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Log-uniform in [a, b], a, b > 0.
    double log_uniform(double a, double b) {
        return std::exp(uniform(std::log(a), std::log(b)));
    }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform direction on the unit sphere in dimension n.
    VecN unit_vector(std::size_t n) {
        VecN v(n);
        double norm = 0.0;
        do {
            for (std::size_t i = 0; i < n; ++i) v[i] = normal();
            norm = v.norm();
        } while (norm < 1e-12);
        return v *= 1.0 / norm;
    }

    bool bernoulli(double prob) { return uniform01() < prob; }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace wdeg
