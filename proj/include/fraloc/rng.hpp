#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fraloc {

/// Seeded random stream with portable draw semantics.
///
/// mt19937_64 output is fully specified by the standard; the mappings to
/// doubles below avoid std::*_distribution, whose algorithms vary between
/// standard libraries. Identical seeds therefore give identical draws on
/// any conforming toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace fraloc
