#include "o3dsp/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "o3dsp/io.hpp"
#include "o3dsp/rng.hpp"

namespace o3dsp {

void FluxParams::validate() const {
  if (!(signal_rate >= 0.0) || !(background_rate >= 0.0) ||
      !std::isfinite(signal_rate) || !std::isfinite(background_rate))
    throw InvalidInputError("FluxParams: rates must be finite and >= 0");
  if (signal_rate + background_rate > 1.0)
    throw InvalidInputError(
        "FluxParams: total rate above 1 per repetition violates the "
        "low-flux observation model");
  if (reps < 1) throw InvalidInputError("FluxParams: reps must be >= 1");
}

DetectionProbabilities flux_to_probabilities(const FluxParams& flux) {
  flux.validate();
  const double total = flux.signal_rate + flux.background_rate;
  if (total == 0.0)
    throw InvalidInputError(
        "flux_to_probabilities: zero total flux, signal fraction undefined");
  DetectionProbabilities out;
  out.detect_prob = 1.0 - std::exp(-static_cast<double>(flux.reps) * total);
  out.signal_frac = flux.signal_rate / total;
  return out;
}

void GroundTruthFrame::validate(double rep_period) const {
  const Eigen::Index n = static_cast<Eigen::Index>(height) * width;
  if (height <= 0 || width <= 0 || range.size() != n ||
      signal_frac.size() != n || detect_prob.size() != n)
    throw InvalidInputError("GroundTruthFrame: inconsistent dimensions");
  if ((range < 0.0).any() || (range >= rep_period).any())
    throw InvalidInputError("GroundTruthFrame: range outside [0, rep_period)");
  if ((signal_frac < 0.0).any() || (signal_frac > 1.0).any())
    throw InvalidInputError("GroundTruthFrame: signal_frac outside [0,1]");
  if ((detect_prob < 0.0).any() || (detect_prob > 1.0).any())
    throw InvalidInputError("GroundTruthFrame: detect_prob outside [0,1]");
}

namespace {

double sine_w_at(const SinePixelScene& s, std::int64_t n) {
  double w = s.w_schedule.empty() ? 0.5 : s.w_schedule.front().w;
  for (const WSegment& seg : s.w_schedule)
    if (n >= seg.start) w = seg.w;
  return w;
}

GroundTruthFrame eval_sine(const SceneSpec& spec, const SinePixelScene& s,
                           std::int64_t n) {
  GroundTruthFrame out;
  out.height = spec.height;
  out.width = spec.width;
  const int p = spec.height * spec.width;
  const double d =
      s.center + s.amplitude * std::sin(2.0 * kPi * static_cast<double>(n) /
                                        s.period_frames);
  out.range = Eigen::ArrayXd::Constant(p, d);
  out.signal_frac = Eigen::ArrayXd::Constant(p, sine_w_at(s, n));
  out.detect_prob = Eigen::ArrayXd::Constant(p, s.detect_prob);
  return out;
}

/// Built-in static scene: a dome-shaped foreground and a pedestal over a
/// flat backplane, sized relative to the grid.
void synthesize_static_maps(StaticMapsScene& s, int height, int width) {
  const int n = height * width;
  s.range_map = Eigen::ArrayXd::Constant(n, 2000.0);
  s.signal_frac_map = Eigen::ArrayXd::Constant(n, 0.45);
  s.detect_prob_map = Eigen::ArrayXd::Constant(n, 0.045);

  const double cy = 0.42 * height;
  const double cx = 0.5 * width;
  const double ry = 0.30 * height;
  const double rx = 0.26 * width;

  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const int p = r * width + c;
      const double qy = (r - cy) / ry;
      const double qx = (c - cx) / rx;
      const double q = qy * qy + qx * qx;
      if (q < 1.0) {
        // dome: nearest at the center, receding toward the rim
        s.range_map[p] = 1400.0 - 400.0 * std::sqrt(1.0 - q);
        s.signal_frac_map[p] = 0.7;
        s.detect_prob_map[p] = 0.055;
      } else if (r >= static_cast<int>(0.8 * height)) {
        // pedestal band along the bottom
        s.range_map[p] = 1600.0;
        s.signal_frac_map[p] = 0.6;
        s.detect_prob_map[p] = 0.05;
      }
    }
}

GroundTruthFrame eval_static(const SceneSpec& spec, const StaticMapsScene& s) {
  if (!s.loaded)
    throw InvalidInputError(
        "scene_eval: static maps not loaded; call load_scene_maps first");
  GroundTruthFrame out;
  out.height = spec.height;
  out.width = spec.width;
  out.range = s.range_map;
  out.signal_frac = s.signal_frac_map;
  out.detect_prob =
      (s.detect_prob_map * s.detect_prob_scale).cwiseMin(1.0);
  return out;
}

void paint_rect(GroundTruthFrame& f, double center_row, double center_col,
                int half, double range, double w) {
  const int r0 = std::max(0, static_cast<int>(std::lround(center_row)) - half);
  const int r1 = std::min(f.height - 1,
                          static_cast<int>(std::lround(center_row)) + half);
  const int c0 = std::max(0, static_cast<int>(std::lround(center_col)) - half);
  const int c1 = std::min(f.width - 1,
                          static_cast<int>(std::lround(center_col)) + half);
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) {
      const int p = r * f.width + c;
      if (range < f.range[p]) {  // nearer surface wins
        f.range[p] = range;
        f.signal_frac[p] = w;
      }
    }
}

GroundTruthFrame eval_rects(const SceneSpec& spec, const RectDanceScene& s,
                            std::int64_t n) {
  GroundTruthFrame out;
  out.height = spec.height;
  out.width = spec.width;
  const int p = spec.height * spec.width;
  out.range = Eigen::ArrayXd::Constant(p, s.backplane_range);
  out.signal_frac = Eigen::ArrayXd::Constant(p, s.backplane_w);
  out.detect_prob = Eigen::ArrayXd::Constant(p, s.detect_prob);

  const double cy = 0.5 * (spec.height - 1);
  const double cx = 0.5 * (spec.width - 1);
  const double deg2rad = kPi / 180.0;

  // object 1: static in phase 1, gone in phase 2, re-approaching in phase 3
  if (n < s.phase1_end) {
    const double a = s.obj1_angle_deg * deg2rad;
    paint_rect(out, cy - s.orbit_radius * std::sin(a),
               cx + s.orbit_radius * std::cos(a), s.obj1_half, s.obj1_range,
               s.object_w);
  } else if (n >= s.phase2_end) {
    const double a = s.obj1_angle_deg * deg2rad;
    const double range =
        std::max(s.obj1_range, s.backplane_range - s.obj1_retreat_rate *
                                                       static_cast<double>(
                                                           n - s.phase2_end));
    paint_rect(out, cy - s.orbit_radius * std::sin(a),
               cx + s.orbit_radius * std::cos(a), s.obj1_half, range,
               s.object_w);
  }

  // object 2: orbits the image center throughout, breathing in phase 2
  {
    const double a =
        (s.start_angle_deg + s.rotation_deg_per_frame * static_cast<double>(n)) *
        deg2rad;
    int half = s.obj2_half;
    if (n >= s.phase1_end && n < s.phase2_end) {
      const double t = static_cast<double>(n - s.phase1_end) /
                       static_cast<double>(s.phase2_end - s.phase1_end);
      half = std::max(2, static_cast<int>(std::lround(
                             s.obj2_half * (1.0 + 0.5 * std::sin(2.0 * kPi * t)))));
    }
    paint_rect(out, cy - s.orbit_radius * std::sin(a),
               cx + s.orbit_radius * std::cos(a), half, s.obj2_range,
               s.object_w);
  }

  // object 3: slides in from the left edge in phase 3
  if (n >= s.phase2_end) {
    const double col = -s.obj3_half +
                       s.obj3_speed * static_cast<double>(n - s.phase2_end);
    paint_rect(out, cy, col, s.obj3_half, s.obj3_range, s.object_w);
  }

  return out;
}

}  // namespace

void load_scene_maps(SceneSpec& spec) {
  auto* s = std::get_if<StaticMapsScene>(&spec.kind);
  if (!s || s->loaded) return;
  if (s->range_path.empty() && s->signal_frac_path.empty() &&
      s->detect_prob_path.empty()) {
    synthesize_static_maps(*s, spec.height, spec.width);
  } else {
    if (s->range_path.empty() || s->signal_frac_path.empty() ||
        s->detect_prob_path.empty())
      throw InvalidInputError(
          "load_scene_maps: either all three raster paths or none");
    int h = 0, w = 0;
    s->range_map = read_raster(s->range_path, h, w);
    if (h != spec.height || w != spec.width)
      throw InvalidInputError("load_scene_maps: range raster dims mismatch");
    s->signal_frac_map = read_raster(s->signal_frac_path, h, w);
    if (h != spec.height || w != spec.width)
      throw InvalidInputError("load_scene_maps: w raster dims mismatch");
    s->detect_prob_map = read_raster(s->detect_prob_path, h, w);
    if (h != spec.height || w != spec.width)
      throw InvalidInputError("load_scene_maps: pi raster dims mismatch");
  }
  s->loaded = true;
}

GroundTruthFrame scene_eval(const SceneSpec& spec, std::int64_t n) {
  if (n < 0 || n >= spec.frames)
    throw InvalidInputError("scene_eval: frame index out of range");
  if (const auto* s = std::get_if<SinePixelScene>(&spec.kind))
    return eval_sine(spec, *s, n);
  if (const auto* s = std::get_if<StaticMapsScene>(&spec.kind))
    return eval_static(spec, *s);
  return eval_rects(spec, std::get<RectDanceScene>(spec.kind), n);
}

FrameEvents sample_frame(const GroundTruthFrame& truth,
                         const SystemConfig& sys, std::uint64_t seed,
                         std::int64_t scene_index,
                         std::vector<std::uint8_t>* labels) {
  const double irf_std = std::sqrt(sys.irf_variance);
  FrameEvents events;
  events.frame_index = scene_index + 1;
  if (labels) labels->clear();

  const int n = truth.height * truth.width;
  for (int p = 0; p < n; ++p) {
    PixelStream stream(seed, static_cast<std::uint64_t>(scene_index),
                       static_cast<std::uint64_t>(p));
    if (stream.uniform() >= truth.detect_prob[p]) continue;

    double toa;
    std::uint8_t is_signal;
    if (stream.uniform() < truth.signal_frac[p]) {
      is_signal = 1;
      do {
        toa = stream.gaussian(sys.delay_of(truth.range[p]), irf_std);
      } while (toa < 0.0 || toa >= sys.rep_period);
    } else {
      is_signal = 0;
      toa = stream.uniform() * sys.rep_period;
    }
    events.detections.push_back({static_cast<std::uint32_t>(p), toa});
    if (labels) labels->push_back(is_signal);
  }
  return events;
}

}  // namespace o3dsp
