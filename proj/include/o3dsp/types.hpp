#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "o3dsp/errors.hpp"

namespace o3dsp {

inline constexpr double kPi = 3.14159265358979323846;

/// Acquisition constants shared by the simulator and the filter.
///
/// Ranges are expressed directly in time-of-arrival units: with
/// speed_scale = 1 a target at range d produces a mean ToA of d, and
/// all ToAs live in [0, rep_period).
struct SystemConfig {
  double rep_period = 1500.0;    ///< T_r, one illumination period
  double irf_variance = 200.0;   ///< variance of the Gaussian impulse response
  double speed_scale = 1.0;      ///< range -> delay conversion factor
  std::uint32_t frame_reps = 1;  ///< laser repetitions per recorded frame

  double delay_of(double range) const { return speed_scale * range; }

  void validate() const {
    if (!(rep_period > 0.0) || !std::isfinite(rep_period))
      throw InvalidInputError("SystemConfig: rep_period must be positive");
    if (!(irf_variance > 0.0) || !std::isfinite(irf_variance))
      throw InvalidInputError("SystemConfig: irf_variance must be positive");
    if (frame_reps < 1)
      throw InvalidInputError("SystemConfig: frame_reps must be >= 1");
  }
};

/// Unit-normalized Gaussian system impulse response.
struct ImpulseResponse {
  double variance = 200.0;

  /// Density at offset t from the response mean.
  double density(double t) const {
    return std::exp(-0.5 * t * t / variance) / std::sqrt(2.0 * kPi * variance);
  }

  double peak_density() const { return 1.0 / std::sqrt(2.0 * kPi * variance); }
};

/// Per-pixel approximating posterior: a single Gaussian over range.
struct GaussianBelief {
  double mean = 0.0;
  double variance = 1.0;
};

struct MixtureComponent {
  double weight = 0.0;
  double mean = 0.0;
  double variance = 1.0;
};

/// Weighted finite Gaussian mixture with inline storage.
///
/// Capacity covers the largest mixture the filter produces: the
/// cross-shaped neighborhood (5) plus edge and occlusion extras, doubled
/// by a detection update.
class MixtureBelief {
 public:
  static constexpr int kCapacity = 16;

  MixtureBelief() = default;

  void push_back(const MixtureComponent& c) {
    if (size_ >= kCapacity)
      throw InvalidInputError("MixtureBelief: capacity exceeded");
    comps_[size_++] = c;
  }

  int size() const { return size_; }
  bool empty() const { return size_ == 0; }

  MixtureComponent& operator[](int i) { return comps_[i]; }
  const MixtureComponent& operator[](int i) const { return comps_[i]; }

  MixtureComponent* begin() { return comps_.data(); }
  MixtureComponent* end() { return comps_.data() + size_; }
  const MixtureComponent* begin() const { return comps_.data(); }
  const MixtureComponent* end() const { return comps_.data() + size_; }

 private:
  std::array<MixtureComponent, kCapacity> comps_{};
  int size_ = 0;
};

}  // namespace o3dsp
