#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace orchard {

/// The single seeded generator behind every random draw in the toolkit.
///
/// Draws are built directly from mt19937_64 output bits, whose sequence is
/// fixed by the standard, so a seed gives the same numbers on every platform
/// (the std distributions do not make that promise).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Box-Muller; one variate per call.
    double normal(double mean = 0.0, double stddev = 1.0) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace orchard
