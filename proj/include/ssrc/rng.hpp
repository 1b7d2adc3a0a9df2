#pragma once

#include <cstdint>
#include <random>

namespace ssrc {

using Rng = std::mt19937_64;

// Independent, reproducible stream for (seed, purpose, index).
inline Rng derive_rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

// Uniform integer in [lo, hi].
inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace ssrc
