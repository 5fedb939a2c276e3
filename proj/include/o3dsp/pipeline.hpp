#pragma once

#include <cstdint>
#include <string>

#include "o3dsp/config.hpp"
#include "o3dsp/filter.hpp"
#include "o3dsp/metrics.hpp"

namespace o3dsp {

/// simulate: evaluate the scene per frame, sample detections, write
/// events.pev1 + truth.gtv1 (and labels.u8 when debug_labels is set).
struct SimulateOptions {
  RunConfig cfg;
  std::string out_dir;
  bool debug_labels = false;
};

struct SimulateResult {
  std::string events_path;
  std::string truth_path;
  std::uint64_t total_detections = 0;
};

SimulateResult run_simulate(const SimulateOptions& opt);

/// reconstruct: stream the event file through step_frame with bounded
/// memory (one frame of events and two belief grids resident), writing
/// metrics.csv, optional periodic checkpoints and final rasters.
struct ReconstructOptions {
  std::string events_path;
  std::string out_dir;
  std::string truth_path;  ///< optional; enables rmse / weight_mae columns
  FilterParams params;     ///< init/edge scales are re-derived from the header
  bool params_from_header_scales = true;
  bool no_st = false;      ///< self-only neighborhood, smoothing off
  std::int64_t checkpoint_every = 0;
  int workers = 1;
};

struct ReconstructResult {
  BeliefGrid final_grid;
  std::int64_t frames = 0;
  double mean_step_time_s = 0.0;  ///< after a 10-frame warmup
  std::string metrics_path;
};

ReconstructResult run_reconstruct(const ReconstructOptions& opt);

/// baseline: batch cross-correlation estimates per pixel, streamed batch
/// by batch, written as CSV (batch,frame_begin,frame_end,pixel,estimate,
/// carried). `pixel` = -1 runs every pixel.
struct BaselineOptions {
  std::string events_path;
  std::string out_dir;
  std::int64_t batch_size = 100;
  std::int64_t pixel = -1;
  double bin_width = 1.0;
};

struct BaselineResult {
  std::string csv_path;
  std::int64_t batches = 0;
};

BaselineResult run_baseline(const BaselineOptions& opt);

/// bench: synthetic events at the given detection probability, timed
/// through step_frame. Reports the mean step wall time after a 10-frame
/// warmup.
struct BenchOptions {
  int height = 100;
  int width = 100;
  std::int64_t frames = 200;
  double detect_prob = 0.05;
  int workers = 1;
  std::uint64_t seed = 1;
};

struct BenchResult {
  double mean_step_time_s = 0.0;
  double frames_per_second = 0.0;
};

BenchResult run_bench(const BenchOptions& opt);

}  // namespace o3dsp
