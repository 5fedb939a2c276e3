#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "o3dsp/filter.hpp"
#include "o3dsp/types.hpp"

namespace o3dsp {

/// Per-repetition photon budget of one pixel.
struct FluxParams {
  double signal_rate = 0.0;      ///< r * S per repetition
  double background_rate = 0.0;  ///< B = T_r * b per repetition
  std::uint32_t reps = 1;        ///< repetitions per frame (N_r)

  void validate() const;

  /// True while signal_rate + background_rate stays at or below 0.1 per
  /// repetition; above that the at-most-one-detection model degrades.
  bool low_flux() const { return signal_rate + background_rate <= 0.1; }
};

struct DetectionProbabilities {
  double detect_prob = 0.0;  ///< per-frame probability of any detection
  double signal_frac = 0.0;  ///< probability a detection is signal
};

/// detect_prob = 1 - exp(-reps * (signal + background));
/// signal_frac = signal / (signal + background).
DetectionProbabilities flux_to_probabilities(const FluxParams& flux);

/// Per-pixel ground truth for one frame (flat, row-major maps).
struct GroundTruthFrame {
  int height = 0;
  int width = 0;
  Eigen::ArrayXd range;        ///< d, in [0, T_r)
  Eigen::ArrayXd signal_frac;  ///< w, in [0, 1]
  Eigen::ArrayXd detect_prob;  ///< pi, in [0, 1]

  void validate(double rep_period) const;
};

/// A weight schedule step: from frame `start` (0-based) on, w = `w`.
struct WSegment {
  std::int64_t start = 0;
  double w = 0.5;
};

/// Single pixel whose range follows a sine and whose signal fraction
/// follows a piecewise-constant schedule.
struct SinePixelScene {
  double center = 750.0;
  double amplitude = 0.0;
  double period_frames = 1000.0;
  std::vector<WSegment> w_schedule = {{0, 0.5}};
  double detect_prob = 0.5;
};

/// Static scene from raster files, or the built-in synthetic scene
/// (a dome-shaped foreground over a backplane) when no paths are given.
struct StaticMapsScene {
  std::string range_path;
  std::string signal_frac_path;
  std::string detect_prob_path;
  double detect_prob_scale = 1.0;

  // Populated by load_scene_maps / built lazily for the synthetic scene.
  Eigen::ArrayXd range_map, signal_frac_map, detect_prob_map;
  bool loaded = false;
};

/// Three-phase choreography over a static backplane:
///   phase 1 (frames [0, phase1_end)): a static rectangle (object 1) and a
///     rectangle circling the image center, which passes in front of
///     object 1 and occludes it;
///   phase 2: object 1 gone, the orbiting rectangle continues with a
///     breathing size;
///   phase 3: a third rectangle slides in from the left at constant
///     range while object 1 reappears at the backplane and approaches.
struct RectDanceScene {
  double backplane_range = 2000.0;
  double backplane_w = 0.5;
  double object_w = 0.7;
  double detect_prob = 0.5;

  int obj1_half = 8;
  double obj1_range = 1200.0;
  double obj1_angle_deg = 0.0;  ///< where on the orbit circle object 1 sits

  int obj2_half = 10;
  double obj2_range = 600.0;
  double orbit_radius = 30.0;
  double rotation_deg_per_frame = 0.45;
  double start_angle_deg = 180.0;

  int obj3_half = 8;
  double obj3_range = 1000.0;
  double obj3_speed = 0.1;  ///< pixels per frame

  double obj1_retreat_rate = 0.5;  ///< range decrease per frame in phase 3

  std::int64_t phase1_end = 800;
  std::int64_t phase2_end = 1600;
};

struct SceneSpec {
  int height = 1;
  int width = 1;
  std::int64_t frames = 1;
  std::variant<SinePixelScene, StaticMapsScene, RectDanceScene> kind =
      SinePixelScene{};

  bool is_static() const {
    return std::holds_alternative<StaticMapsScene>(kind);
  }
};

/// Loads raster-backed static maps (or synthesizes the built-in scene)
/// into the spec so scene_eval does not touch the filesystem.
void load_scene_maps(SceneSpec& spec);

/// Ground truth for 0-based scene frame n; deterministic in (spec, n).
GroundTruthFrame scene_eval(const SceneSpec& spec, std::int64_t n);

/// Samples one frame of detections under the observation model:
/// detect with probability pi; a detection is signal with probability w
/// (ToA ~ Gaussian around the range, redrawn while outside [0, T_r)) and
/// background otherwise (ToA uniform). Draws come from per-pixel
/// substreams keyed by (seed, scene_index, pixel), so the result is
/// reproducible and order-independent.
///
/// `scene_index` is the 0-based ground-truth frame; the returned events
/// carry frame_index = scene_index + 1 (the filter's 1-based frame).
/// When `labels` is non-null it receives one byte per detection
/// (1 = signal, 0 = background), in detection order.
FrameEvents sample_frame(const GroundTruthFrame& truth,
                         const SystemConfig& sys, std::uint64_t seed,
                         std::int64_t scene_index,
                         std::vector<std::uint8_t>* labels = nullptr);

}  // namespace o3dsp
