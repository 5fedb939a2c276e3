#include "o3dsp/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

#include "o3dsp/io.hpp"
#include "o3dsp/simulator.hpp"
#include "o3dsp/xcorr.hpp"

namespace o3dsp {

namespace {

namespace fs = std::filesystem;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string checkpoint_name(const char* what, std::int64_t frame) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "ckpt_%s_%08lld.f64", what,
                static_cast<long long>(frame));
  return buf;
}

}  // namespace

SimulateResult run_simulate(const SimulateOptions& opt) {
  RunConfig cfg = opt.cfg;
  cfg.sys.validate();
  load_scene_maps(cfg.scene);
  fs::create_directories(opt.out_dir);

  SimulateResult result;
  result.events_path = join(opt.out_dir, "events.pev1");
  result.truth_path = join(opt.out_dir, "truth.gtv1");

  EventStreamHeader eh;
  eh.height = static_cast<std::uint32_t>(cfg.scene.height);
  eh.width = static_cast<std::uint32_t>(cfg.scene.width);
  eh.frame_count = static_cast<std::uint64_t>(cfg.scene.frames);
  eh.rep_period = cfg.sys.rep_period;
  eh.irf_variance = cfg.sys.irf_variance;
  EventWriter events(result.events_path, eh);

  GroundTruthHeader th;
  th.height = eh.height;
  th.width = eh.width;
  th.frame_count = eh.frame_count;
  th.mode = cfg.scene.is_static() ? 0 : 1;
  GroundTruthWriter truth(result.truth_path, th);

  std::FILE* labels_file = nullptr;
  if (opt.debug_labels) {
    labels_file = std::fopen(join(opt.out_dir, "labels.u8").c_str(), "wb");
    if (!labels_file)
      throw ParseError(join(opt.out_dir, "labels.u8") + ": cannot open");
  }

  std::vector<std::uint8_t> labels;
  for (std::int64_t n = 0; n < cfg.scene.frames; ++n) {
    const GroundTruthFrame frame = scene_eval(cfg.scene, n);
    if (n == 0) frame.validate(cfg.sys.rep_period);
    const FrameEvents ev = sample_frame(frame, cfg.sys, cfg.seed, n,
                                        opt.debug_labels ? &labels : nullptr);
    events.write_frame(ev);
    result.total_detections += ev.detections.size();
    if (th.mode == 1 || n == 0) truth.write_frame(frame);
    if (labels_file && !labels.empty())
      std::fwrite(labels.data(), 1, labels.size(), labels_file);
  }
  events.finish();
  truth.finish();
  if (labels_file) std::fclose(labels_file);
  return result;
}

ReconstructResult run_reconstruct(const ReconstructOptions& opt) {
  EventReader events(opt.events_path);
  const EventStreamHeader& eh = events.header();

  SystemConfig sys;
  sys.rep_period = eh.rep_period;
  sys.irf_variance = eh.irf_variance;
  sys.validate();

  FilterParams params = opt.params;
  if (opt.params_from_header_scales) {
    const FilterParams scales = default_filter_params(sys);
    params.init_mean = scales.init_mean;
    params.init_variance = scales.init_variance;
    params.edge_extra_variance = scales.edge_extra_variance;
  }
  if (opt.no_st) {
    params.neighborhood = Neighborhood::kSelfOnly;
    params.smooth_std = 0.0;
  }
  params.validate();

  const int height = static_cast<int>(eh.height);
  const int width = static_cast<int>(eh.width);

  std::optional<GroundTruthReader> truth;
  std::optional<GroundTruthFrame> static_truth;
  if (!opt.truth_path.empty()) {
    truth.emplace(opt.truth_path);
    if (truth->header().height != eh.height || truth->header().width != eh.width)
      throw InvalidInputError("run_reconstruct: truth dims do not match events");
    if (truth->header().mode == 0) static_truth = truth->read_frame(0);
  }

  fs::create_directories(opt.out_dir);
  ReconstructResult result;
  result.metrics_path = join(opt.out_dir, "metrics.csv");
  MetricsCsvWriter csv(result.metrics_path);

  BeliefGrid grid = init_state(height, width, sys, params);
  FrameEvents frame;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double time_sum = 0.0;
  std::int64_t timed_frames = 0;

  while (events.next_frame(frame)) {
    const double t0 = now_seconds();
    grid = step_frame(grid, frame, sys, params, opt.workers);
    const double dt = now_seconds() - t0;

    FrameMetrics m;
    m.frame = grid.frame_index;
    m.step_time_s = dt;
    m.mean_ci_width = ci_width_map(grid).mean();
    m.rmse = nan;
    m.weight_mae = nan;
    if (truth) {
      const GroundTruthFrame t = static_truth
                                     ? *static_truth
                                     : truth->read_frame(grid.frame_index - 1);
      m.rmse = rmse_frame(grid.mean, t.range);
      m.weight_mae = weight_mae(grid.wbar, t.signal_frac);
    }
    csv.write_row(m);

    if (grid.frame_index > 10) {
      time_sum += dt;
      ++timed_frames;
    }
    if (opt.checkpoint_every > 0 && grid.frame_index % opt.checkpoint_every == 0) {
      write_raster(join(opt.out_dir, checkpoint_name("range", grid.frame_index)),
                   grid.mean, height, width, grid.frame_index);
      write_raster(join(opt.out_dir, checkpoint_name("std", grid.frame_index)),
                   grid.variance.sqrt(), height, width, grid.frame_index);
      write_raster(join(opt.out_dir, checkpoint_name("wbar", grid.frame_index)),
                   grid.wbar, height, width, grid.frame_index);
    }
  }

  write_raster(join(opt.out_dir, "final_range.f64"), grid.mean, height, width,
               grid.frame_index);
  write_raster(join(opt.out_dir, "final_std.f64"), grid.variance.sqrt(), height,
               width, grid.frame_index);
  write_raster(join(opt.out_dir, "final_wbar.f64"), grid.wbar, height, width,
               grid.frame_index);

  result.frames = grid.frame_index;
  result.mean_step_time_s = timed_frames > 0 ? time_sum / timed_frames : 0.0;
  result.final_grid = std::move(grid);
  return result;
}

BaselineResult run_baseline(const BaselineOptions& opt) {
  EventReader events(opt.events_path);
  const EventStreamHeader& eh = events.header();
  const std::int64_t pixels =
      static_cast<std::int64_t>(eh.height) * eh.width;
  if (opt.pixel >= pixels)
    throw InvalidInputError("run_baseline: pixel out of range");
  if (opt.batch_size < 1)
    throw InvalidInputError("run_baseline: batch_size must be >= 1");

  const ImpulseResponse irf{eh.irf_variance};
  fs::create_directories(opt.out_dir);
  BaselineResult result;
  result.csv_path = join(opt.out_dir, "baseline.csv");
  std::FILE* csv = std::fopen(result.csv_path.c_str(), "w");
  if (!csv) throw ParseError(result.csv_path + ": cannot open for writing");
  std::fputs("batch,frame_begin,frame_end,pixel,estimate,carried\n", csv);

  const std::int64_t first =
      opt.pixel >= 0 ? opt.pixel : 0;
  const std::int64_t last = opt.pixel >= 0 ? opt.pixel + 1 : pixels;
  std::vector<std::vector<double>> toas(
      static_cast<std::size_t>(last - first));
  std::vector<double> carry(static_cast<std::size_t>(last - first),
                            std::numeric_limits<double>::quiet_NaN());

  FrameEvents frame;
  std::int64_t frame_in_batch = 0;
  std::int64_t batch_begin = 0;
  std::int64_t batch = 0;

  const auto flush_batch = [&](std::int64_t end_frame) {
    for (std::int64_t p = first; p < last; ++p) {
      auto& list = toas[static_cast<std::size_t>(p - first)];
      double& prev = carry[static_cast<std::size_t>(p - first)];
      const auto est = xcorr_depth(
          build_histogram(list, eh.rep_period, opt.bin_width), irf);
      const bool carried = !est && !std::isnan(prev);
      double value = std::numeric_limits<double>::quiet_NaN();
      if (est) {
        value = *est;
        prev = value;
      } else if (carried) {
        value = prev;
      }
      std::fprintf(csv, "%lld,%lld,%lld,%lld,%.9g,%d\n",
                   static_cast<long long>(batch),
                   static_cast<long long>(batch_begin),
                   static_cast<long long>(end_frame), static_cast<long long>(p),
                   value, carried ? 1 : 0);
      list.clear();
    }
    ++batch;
    batch_begin = end_frame;
    frame_in_batch = 0;
  };

  std::int64_t frames_read = 0;
  while (events.next_frame(frame)) {
    ++frames_read;
    for (const Detection& d : frame.detections) {
      const std::int64_t p = static_cast<std::int64_t>(d.pixel);
      if (p >= first && p < last)
        toas[static_cast<std::size_t>(p - first)].push_back(d.toa);
    }
    if (++frame_in_batch == opt.batch_size) flush_batch(frames_read);
  }
  if (frame_in_batch > 0) flush_batch(frames_read);

  std::fclose(csv);
  result.batches = batch;
  return result;
}

BenchResult run_bench(const BenchOptions& opt) {
  SystemConfig sys;  // desk-scale defaults: T_r = 1500, s^2 = 200
  SceneSpec scene;
  scene.height = opt.height;
  scene.width = opt.width;
  scene.frames = opt.frames;
  SinePixelScene s;
  s.center = 600.0;
  s.amplitude = 150.0;
  s.period_frames = 400.0;
  s.detect_prob = opt.detect_prob;
  s.w_schedule = {{0, 0.7}};
  scene.kind = s;

  FilterParams params = default_filter_params(sys);
  params.attenuation = 0.1;
  params.rw_variance = 10.0;
  params.smooth_std = 0.5;

  BeliefGrid grid = init_state(opt.height, opt.width, sys, params);
  double time_sum = 0.0;
  std::int64_t timed = 0;
  for (std::int64_t n = 0; n < opt.frames; ++n) {
    const FrameEvents ev =
        sample_frame(scene_eval(scene, n), sys, opt.seed, n);
    const double t0 = now_seconds();
    grid = step_frame(grid, ev, sys, params, opt.workers);
    const double dt = now_seconds() - t0;
    if (n >= 10) {
      time_sum += dt;
      ++timed;
    }
  }
  BenchResult result;
  result.mean_step_time_s = timed > 0 ? time_sum / timed : 0.0;
  result.frames_per_second =
      result.mean_step_time_s > 0.0 ? 1.0 / result.mean_step_time_s : 0.0;
  return result;
}

}  // namespace o3dsp
