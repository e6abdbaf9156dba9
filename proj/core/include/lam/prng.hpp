#pragma once

#include <cstdint>

namespace lam {

/// Deterministic 64-bit mixing generator (splitmix64). The state update is
/// part of the repository contract so any language can reproduce identical
/// streams from the same seed:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z xor (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z xor (z >> 27)) * 0x94D049BB133111EB
///   output = z xor (z >> 31)
///
/// Doubles in [0,1) take the top 53 bits: (output >> 11) * 2^-53.
class Prng {
public:
    explicit Prng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + next_double() * (hi - lo);
    }

    /// Standard normal via Box-Muller; consumes exactly two draws.
    double normal();

    /// Uniform integer in [0, n); n must be positive. Consumes one draw.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace lam
