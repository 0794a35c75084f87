#pragma once

#include <cstdint>
#include <random>

namespace acsim {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the stream identified by (global seed, stream tag, index).
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
  return mix64(mix64(mix64(seed) ^ tag) ^ index);
}

namespace streams {
inline constexpr std::uint64_t kArrivals = 0xA441;
inline constexpr std::uint64_t kUe = 0x0E0E;
inline constexpr std::uint64_t kPolicy = 0x9011;
inline constexpr std::uint64_t kInit = 0x1417;
}  // namespace streams

}  // namespace acsim
