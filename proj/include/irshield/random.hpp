// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace irshield {

using Engine = std::mt19937_64;

// Stream identifiers keep independent consumers of one scenario seed apart.
enum class Stream : std::uint64_t {
  Noise = 1,
  Irs = 2,
  Layout = 3,
  Ensemble = 4,
  Cell = 5,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t counter = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(stream)) ^ counter);
}

inline Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t counter = 0) {
  return Engine(derive_seed(seed, stream, counter));
}

}  // namespace irshield
