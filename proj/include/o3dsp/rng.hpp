#pragma once

#include <cmath>
#include <cstdint>

#include "o3dsp/types.hpp"

namespace o3dsp {

/// SplitMix64 finalizer; bijective 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream keyed by (seed, frame, pixel).
///
/// Each pixel-frame cell owns a disjoint substream, so draws are
/// order-independent across pixels and frames: adding or removing a
/// pixel never perturbs another pixel's values.
class PixelStream {
 public:
  PixelStream(std::uint64_t seed, std::uint64_t frame, std::uint64_t pixel)
      : state_(mix64(mix64(mix64(seed) ^ frame) ^ pixel)) {}

  /// Uniform draw in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Box-Muller Gaussian draw.
  double gaussian(double mean, double stddev) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace o3dsp
