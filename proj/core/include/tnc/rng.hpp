#pragma once

#include <cstdint>
#include <random>

namespace tnc {

using Rng = std::mt19937_64;

/// Independent stream for sub-task `stream` of a run seeded with `seed`.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x746e63u};
  return Rng(seq);
}

}  // namespace tnc
