#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "o3dsp/filter.hpp"

namespace o3dsp {

struct FrameMetrics {
  std::int64_t frame = 0;
  double rmse = 0.0;
  double mean_ci_width = 0.0;
  double weight_mae = 0.0;
  double step_time_s = 0.0;
};

/// Root mean square range error over the pixel grid.
double rmse_frame(const Eigen::ArrayXd& estimate, const Eigen::ArrayXd& truth);

/// Per-pixel width of the +/-3 sigma interval: 6 * sqrt(variance).
Eigen::ArrayXd ci_width_map(const BeliefGrid& grid);

/// Mean absolute error of the tracked signal fraction.
double weight_mae(const Eigen::ArrayXd& wbar, const Eigen::ArrayXd& truth_w);

struct ConvergenceSummary {
  bool reached = false;
  std::int64_t first_below = -1;  ///< frame of first RMSE below threshold
  double terminal_rmse = 0.0;     ///< mean RMSE over the last 10% of frames
  double mean_step_time = 0.0;
};

ConvergenceSummary convergence_summary(std::span<const FrameMetrics> metrics,
                                       double threshold);

/// CSV emitter with the fixed header
/// frame,rmse,mean_ci_width,weight_mae,step_time_s.
class MetricsCsvWriter {
 public:
  explicit MetricsCsvWriter(const std::string& path);
  void write_row(const FrameMetrics& m);

 private:
  std::string path_;
  std::vector<char> scratch_;
  FILE* file_;

 public:
  ~MetricsCsvWriter();
  MetricsCsvWriter(const MetricsCsvWriter&) = delete;
  MetricsCsvWriter& operator=(const MetricsCsvWriter&) = delete;
};

/// Parses a metrics CSV produced by MetricsCsvWriter.
std::vector<FrameMetrics> read_metrics_csv(const std::string& path);

}  // namespace o3dsp
