#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "o3dsp/types.hpp"

namespace o3dsp {

/// ToA histogram of one pixel over a batch of frames. counts[k] covers
/// ToAs in [k*bin_width, (k+1)*bin_width).
struct ToAHistogram {
  double bin_width = 1.0;
  std::vector<std::uint32_t> counts;

  std::uint64_t total() const;
};

ToAHistogram build_histogram(std::span<const double> toas, double rep_period,
                             double bin_width);

/// Depth maximizing the circular cross-correlation between the histogram
/// and the impulse response sampled at bin centers. Returns
/// bin_width * lag; ties break toward the smallest lag. Empty histogram
/// yields nullopt (caller carries the previous estimate forward).
std::optional<double> xcorr_depth(const ToAHistogram& hist,
                                  const ImpulseResponse& irf);

struct BatchEstimate {
  std::int64_t batch = 0;
  std::int64_t frame_begin = 0;  ///< first frame of the batch (0-based)
  std::int64_t frame_end = 0;    ///< one past the last frame
  bool has_estimate = false;     ///< false only while no batch ever had data
  bool carried = false;          ///< estimate copied from the previous batch
  double estimate = 0.0;
};

/// Splits one pixel's per-frame ToAs (NaN = no detection) into
/// consecutive batches of `batch_size` frames and estimates each batch
/// by cross-correlation; empty batches carry the previous estimate
/// forward. A short final batch is still estimated.
std::vector<BatchEstimate> batch_estimate(std::span<const double> frame_toas,
                                          std::int64_t batch_size,
                                          double rep_period,
                                          const ImpulseResponse& irf,
                                          double bin_width = 1.0);

}  // namespace o3dsp
