#pragma once

#include <cstdint>
#include <random>

namespace preempt {

/// Derives an independent 64-bit seed from a base seed and a stream index,
/// so that parallel runs / trials get decorrelated generators.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // SplitMix64 finalizer over the combined value.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t stream = 0) {
  return std::mt19937_64(derive_seed(base, stream));
}

/// Uniform integer in [0, n). Hand-rolled (rejection sampling) so results are
/// identical across standard library implementations.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Uniform double in [0, 1) with 53-bit resolution.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

/// Bernoulli draw with probability p.
inline bool chance(std::mt19937_64& rng, double p) {
  return uniform_unit(rng) < p;
}

}  // namespace preempt
