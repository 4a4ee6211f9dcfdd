#pragma once

// Draws from std::mt19937_64 without the standard distributions, whose output
// sequences differ between standard library implementations.

#include <cstdint>
#include <random>

namespace unitsel::detail {

// Uniform in [0, n), rejection-sampled so there is no modulo bias.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace unitsel::detail
