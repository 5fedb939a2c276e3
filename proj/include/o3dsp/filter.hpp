#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "o3dsp/belief.hpp"
#include "o3dsp/types.hpp"

namespace o3dsp {

enum class Neighborhood {
  kSelfOnly,  ///< independent pixels (no spatial coupling)
  kCross5     ///< self plus the 4-connected neighbors
};

/// Tuning knobs of the online filter.
struct FilterParams {
  double rw_variance = 100.0;  ///< random-walk variance per frame (gamma^2)
  double self_prob = 0.99;     ///< probability a surface stays in its pixel (nu)
  double attenuation = 0.01;   ///< weight-tracking gain (alpha)
  Neighborhood neighborhood = Neighborhood::kCross5;
  double smooth_std = 0.0;     ///< Gaussian smoothing of wbar, in pixels; 0 = off

  /// Wide component added at image-border pixels so new objects entering
  /// the field of view stay representable.
  double edge_extra_weight = 0.05;
  double edge_extra_variance = 140625.0;  // (T_r/4)^2 at T_r = 1500

  double init_weight = 0.5;
  double init_mean = 750.0;
  double init_variance = 562500.0;  // (T_r/2)^2 at T_r = 1500

  /// Optional occlusion component centered on the neighborhood median.
  /// Off by default.
  bool occlusion_component_enabled = false;
  double occlusion_weight = 0.05;

  void validate() const;
};

/// Defaults with initialization and edge-component scales derived from
/// the repetition period: init belief N(T_r/2, (T_r/2)^2), edge variance
/// (T_r/4)^2.
FilterParams default_filter_params(const SystemConfig& sys);

/// Per-pixel filter state for one frame. Maps are flat, row-major
/// (pixel = row * width + col).
struct BeliefGrid {
  int height = 0;
  int width = 0;
  std::int64_t frame_index = 0;
  Eigen::ArrayXd mean;
  Eigen::ArrayXd variance;
  Eigen::ArrayXd wbar;

  int pixels() const { return height * width; }
  GaussianBelief belief_at(int pixel) const {
    return {mean[pixel], variance[pixel]};
  }
};

/// One frame's sparse detection record.
struct Detection {
  std::uint32_t pixel = 0;  ///< row-major pixel index
  double toa = 0.0;         ///< time of arrival in [0, T_r)
};

struct FrameEvents {
  std::int64_t frame_index = 0;
  std::vector<Detection> detections;  ///< strictly ascending pixel indices
};

/// Checks pixel ordering, bounds and ToA range; throws InvalidInputError.
void validate_events(const FrameEvents& events, int height, int width,
                     double rep_period);

/// Uniform weakly-informative state: every pixel starts at
/// N(init_mean, init_variance) with weight init_weight, frame 0.
BeliefGrid init_state(int height, int width, const SystemConfig& sys,
                      const FilterParams& params);

/// Next-frame prior for one pixel: each neighbor contributes a component
/// with its posterior moments diffused by the random walk
/// (variance + gamma^2), weighted nu for self and (1-nu)/(M-1) for
/// neighbors. Border pixels drop missing neighbors and gain one wide
/// edge component; weights are renormalized.
MixtureBelief predict_prior(const BeliefGrid& grid, int pixel,
                            const FilterParams& params);

struct PixelUpdate {
  MixtureBelief posterior;
  double what = 0.0;  ///< posterior probability the detection was signal
};

/// Detection update for one pixel. Without an event the posterior is the
/// prior and what = wbar. With an event each prior component splits into
/// a conjugate signal branch (weight u * wbar * evidence) and an
/// unchanged background branch (weight u * (1-wbar) / T_r); the result
/// is normalized and what is the total signal mass.
PixelUpdate update_pixel(const MixtureBelief& prior, std::optional<double> toa,
                         double wbar, const SystemConfig& sys);

/// Elementwise wbar <- (1 - alpha) * wbar + alpha * what.
Eigen::ArrayXd update_weights(const Eigen::ArrayXd& wbar,
                              const Eigen::ArrayXd& what,
                              const FilterParams& params);

/// Separable discrete Gaussian blur of a flat row-major map. Kernel taps
/// at integer offsets up to floor(3 * std) (at least 1), renormalized;
/// borders use replicate padding. std = 0 returns the input unchanged.
Eigen::ArrayXd smooth_weights(const Eigen::ArrayXd& wbar, int height,
                              int width, double smooth_std);

/// One full frame: per-pixel predict / update / project against the
/// immutable input grid, then the weight update and optional smoothing.
/// Pure in (grid, events, sys, params); `workers` only sets the number
/// of threads for the per-pixel phase and never changes the result.
BeliefGrid step_frame(const BeliefGrid& grid, const FrameEvents& events,
                      const SystemConfig& sys, const FilterParams& params,
                      int workers = 1);

}  // namespace o3dsp
