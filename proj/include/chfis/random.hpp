#pragma once

#include <cstdint>
#include <random>

namespace chfis {

/// Deterministic uniform doubles on top of std::mt19937_64. The standard
/// distributions are implementation-defined, so seeded runs would not be
/// reproducible across toolchains; this 53-bit construction is.
inline double canonical_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform draw from [lo, hi).
inline double uniform_double(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * canonical_double(rng);
}

/// Uniform index from [0, n).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

}  // namespace chfis
