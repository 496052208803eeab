#pragma once

#include <cstdint>
#include <random>

namespace subfinsler {

/// All experiments draw from std::mt19937_64. Uniform doubles are built from the
/// top 53 bits directly so that streams are identical across standard libraries.
using Rng = std::mt19937_64;

inline double uniform01(Rng & rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng & rng, double lo, double hi)
{
  return lo + (hi - lo) * uniform01(rng);
}

/// Independent stream for task `index` of a run seeded with `seed` (splitmix64 mix).
inline Rng substream(std::uint64_t seed, std::uint64_t index)
{
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return Rng(x ^ (x >> 31));
}

}  // namespace subfinsler
