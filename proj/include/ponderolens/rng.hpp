#pragma once
#include <cstdint>
#include <random>
#include <string_view>

namespace ponderolens {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seed for a named stage: splitmix64(seed XOR fnv1a64(stage)).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
  return splitmix64(seed ^ fnv1a64(stage));
}

/// Platform-independent uniform draw in [lo, hi).
inline double uniform(std::mt19937_64& g, double lo, double hi) {
  const double u = double(g() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace ponderolens
