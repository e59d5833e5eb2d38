#pragma once

#include <cstdint>
#include <random>

namespace ebcd {

using Engine = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for sub-stream `stream` of `base`:
///   derive_seed(base, stream) = mix64(mix64(base) ^ mix64(stream + 1)).
/// Every trial, replication and permutation batch draws from its own engine
/// seeded this way, so results do not depend on how work is split across
/// threads.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(mix64(base) ^ mix64(stream + 1));
}

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

inline double standard_normal(Engine& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace ebcd
