#pragma once

#include <cstdint>
#include <random>

namespace meg {

/// Reproducible random stream. Streams with the same seed and different
/// stream ids are independent; draws are platform-independent (the standard
/// library distributions are not, so they are avoided).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Exponential with the given rate.
  double exponential(double rate);
  /// Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace meg
