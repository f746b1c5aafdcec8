#pragma once

#include <cstdint>

namespace dfsim {

/// Counter-based 64-bit generator (splitmix64 mixing function).
/// Bit-stable across platforms; split() derives an independent stream,
/// so per-seed runs can be farmed out without correlation.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  SplitMix64 split() { return SplitMix64(next() ^ 0xD1B54A32D192ED03ull); }
};

}  // namespace dfsim
