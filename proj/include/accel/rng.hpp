#pragma once

#include <cstdint>

namespace accel {

/// SplitMix64: a 64-bit counter-based generator.
///
/// The i-th output (i = 1, 2, ...) is mix(seed + i * 0x9E3779B97F4A7C15) with
///   mix(z) = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
///            z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31
/// so a stream is reproducible in any language from the seed alone.
///
/// Derived draws:
///  - uniform(): (next() >> 11) * 2^-53, in [0, 1)
///  - index(n):  next() % n
///  - normal():  Box-Muller on u1 = ((next() >> 11) + 1) * 2^-53 and
///               u2 = uniform(); returns r*cos(2 pi u2) and caches r*sin(2 pi u2)
///               for the following call.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double uniform();
  std::uint64_t index(std::uint64_t n);
  double normal();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace accel
