#pragma once

#include "divgov/types.hpp"

#include <cstdint>

namespace divgov {

/// Deterministic splitmix64 stream. Used instead of std::mt19937 so that
/// sampled values are bit-identical across platforms and standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller (discards the second value).
    double normal() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// Uniform direction on the unit sphere.
    Vec3 unit_vector() {
        Vec3 v;
        do {
            v << normal(), normal(), normal();
        } while (v.norm() < 1e-12);
        return v / v.norm();
    }

    /// Uniform point in the ball of given radius.
    Vec3 in_ball(double radius) {
        double r = radius * std::cbrt(next_double());
        return r * unit_vector();
    }

private:
    std::uint64_t state_;
};

/// Derives a decorrelated child seed, used for per-batch deterministic streams.
inline std::uint64_t child_seed(std::uint64_t base, std::uint64_t index) {
    SplitMix64 g(base ^ (0x632be59bd9b4e019ULL * (index + 1)));
    return g.next_u64();
}

}  // namespace divgov
