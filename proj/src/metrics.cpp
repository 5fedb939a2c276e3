#include "o3dsp/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "o3dsp/errors.hpp"

namespace o3dsp {

double rmse_frame(const Eigen::ArrayXd& estimate, const Eigen::ArrayXd& truth) {
  if (estimate.size() != truth.size() || estimate.size() == 0)
    throw InvalidInputError("rmse_frame: shape mismatch");
  return std::sqrt((estimate - truth).square().mean());
}

Eigen::ArrayXd ci_width_map(const BeliefGrid& grid) {
  return 6.0 * grid.variance.sqrt();
}

double weight_mae(const Eigen::ArrayXd& wbar, const Eigen::ArrayXd& truth_w) {
  if (wbar.size() != truth_w.size() || wbar.size() == 0)
    throw InvalidInputError("weight_mae: shape mismatch");
  return (wbar - truth_w).abs().mean();
}

ConvergenceSummary convergence_summary(std::span<const FrameMetrics> metrics,
                                       double threshold) {
  if (metrics.empty())
    throw InvalidInputError("convergence_summary: empty sequence");
  ConvergenceSummary out;
  for (const FrameMetrics& m : metrics) {
    if (m.rmse < threshold) {
      out.reached = true;
      out.first_below = m.frame;
      break;
    }
  }
  const std::size_t tail =
      std::max<std::size_t>(1, metrics.size() / 10);
  double rmse_sum = 0.0;
  for (std::size_t i = metrics.size() - tail; i < metrics.size(); ++i)
    rmse_sum += metrics[i].rmse;
  out.terminal_rmse = rmse_sum / static_cast<double>(tail);
  double time_sum = 0.0;
  for (const FrameMetrics& m : metrics) time_sum += m.step_time_s;
  out.mean_step_time = time_sum / static_cast<double>(metrics.size());
  return out;
}

MetricsCsvWriter::MetricsCsvWriter(const std::string& path)
    : path_(path), file_(std::fopen(path.c_str(), "w")) {
  if (!file_) throw ParseError(path + ": cannot open for writing");
  std::fputs("frame,rmse,mean_ci_width,weight_mae,step_time_s\n", file_);
}

MetricsCsvWriter::~MetricsCsvWriter() {
  if (file_) std::fclose(file_);
}

void MetricsCsvWriter::write_row(const FrameMetrics& m) {
  std::fprintf(file_, "%lld,%.9g,%.9g,%.9g,%.9g\n",
               static_cast<long long>(m.frame), m.rmse, m.mean_ci_width,
               m.weight_mae, m.step_time_s);
}

std::vector<FrameMetrics> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line) ||
      line != "frame,rmse,mean_ci_width,weight_mae,step_time_s")
    throw ParseError(path + ": missing or unexpected CSV header");
  std::vector<FrameMetrics> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    double fields[5];
    const char* p = line.c_str();
    for (int i = 0; i < 5; ++i) {
      char* end = nullptr;
      fields[i] = std::strtod(p, &end);  // strtod accepts nan/inf spellings
      if (end == p || (i < 4 && *end != ',') || (i == 4 && *end != '\0'))
        throw ParseError(path + ": malformed row " + std::to_string(row));
      p = end + 1;
    }
    FrameMetrics m;
    m.frame = static_cast<std::int64_t>(fields[0]);
    m.rmse = fields[1];
    m.mean_ci_width = fields[2];
    m.weight_mae = fields[3];
    m.step_time_s = fields[4];
    out.push_back(m);
  }
  return out;
}

}  // namespace o3dsp
