#pragma once

#include <cstdint>
#include <random>

namespace onebit {

/// Independent substreams of one trial seed.
enum class Stream : std::uint64_t {
  Support = 1,
  Signal = 2,
  Matrix = 3,
  Noise = 4,
  Flips = 5,
  Internal = 6,
};

/// Seedable generator that gives identical draws on every platform.
///
/// The engine is std::mt19937_64 (fully specified by the standard) seeded
/// with splitmix64(seed) mixed with the stream tag. Uniform and normal
/// variates are derived here from the raw 64-bit output, because the
/// standard distribution classes are implementation-defined.
class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Marsaglia polar method.
  double normal();
  /// Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace onebit
