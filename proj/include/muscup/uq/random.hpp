#pragma once

#include <cstdint>

namespace muscup {

/// Counter-based uniform stream: the value for (seed, a, b) depends on
/// nothing else, so any prefix of a sample set is stable and samples can be
/// generated in any order or on any thread.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

/// Uniform double in [0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b) {
  return static_cast<double>(counter_hash(seed, a, b) >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n).
inline std::uint64_t counter_index(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b, std::uint64_t n) {
  // Multiply-shift keeps the bias below 2^-64 * n.
  const unsigned __int128 prod =
      static_cast<unsigned __int128>(counter_hash(seed, a, b)) * n;
  return static_cast<std::uint64_t>(prod >> 64);
}

}  // namespace muscup
