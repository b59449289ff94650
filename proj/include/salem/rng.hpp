#pragma once

#include <cstdint>
#include <random>

namespace salem {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based stream keyed by (seed, index, lane).
inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t index, std::uint64_t lane = 0) {
  return splitmix64(splitmix64(seed ^ 0x5851f42d4c957f2dULL) ^ splitmix64(index * 0x2545f4914f6cdd1dULL + lane));
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t lane = 0) {
  return static_cast<double>(counter_bits(seed, index, lane) >> 11) * 0x1.0p-53;
}

// Unbiased draw in [0, bound) by rejection.
inline std::uint64_t bounded_draw(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    std::uint64_t x = gen();
    if (x < limit) return x % bound;
  }
}

}  // namespace salem
