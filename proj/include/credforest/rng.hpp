#pragma once

#include <cstdint>
#include <random>

namespace credforest {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent generator for trial `index` of a run seeded with `seed`.
/// Depends on nothing else, so any subset of trials can be re-run alone.
inline std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index)));
}

}  // namespace credforest
