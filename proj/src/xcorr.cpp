#include "o3dsp/xcorr.hpp"

#include <cmath>
#include <numeric>

namespace o3dsp {

std::uint64_t ToAHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ToAHistogram build_histogram(std::span<const double> toas, double rep_period,
                             double bin_width) {
  if (!(rep_period > 0.0) || !(bin_width > 0.0))
    throw InvalidInputError("build_histogram: non-positive period or bin width");
  ToAHistogram hist;
  hist.bin_width = bin_width;
  hist.counts.assign(
      static_cast<std::size_t>(std::ceil(rep_period / bin_width)), 0);
  for (double toa : toas) {
    if (!(toa >= 0.0) || !(toa < rep_period))
      throw InvalidInputError("build_histogram: toa outside [0, rep_period)");
    ++hist.counts[static_cast<std::size_t>(toa / bin_width)];
  }
  return hist;
}

std::optional<double> xcorr_depth(const ToAHistogram& hist,
                                  const ImpulseResponse& irf) {
  const std::size_t bins = hist.counts.size();
  if (bins == 0) throw InvalidInputError("xcorr_depth: no bins");
  if (hist.total() == 0) return std::nullopt;

  // Impulse response at circular bin-center offsets: template[j] is the
  // density a signal photon at delay 0 deposits j bins away.
  const double period = hist.bin_width * static_cast<double>(bins);
  std::vector<double> tmpl(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    double offset = (static_cast<double>(j) + 0.5) * hist.bin_width;
    if (offset >= period / 2.0) offset -= period;
    tmpl[j] = irf.density(offset);
  }

  // Detections are sparse, so correlate over nonzero bins only.
  std::vector<std::size_t> occupied;
  for (std::size_t k = 0; k < bins; ++k)
    if (hist.counts[k] > 0) occupied.push_back(k);

  std::vector<double> score(bins, 0.0);
  double best = -1.0;
  for (std::size_t lag = 0; lag < bins; ++lag) {
    for (std::size_t k : occupied)
      score[lag] +=
          static_cast<double>(hist.counts[k]) * tmpl[(k - lag + bins) % bins];
    best = std::max(best, score[lag]);
  }
  // Exact-arithmetic ties differ here only by accumulation rounding;
  // treat scores within 1e-12 relative of the best as tied and take the
  // smallest lag.
  for (std::size_t lag = 0; lag < bins; ++lag)
    if (score[lag] >= best - 1e-12 * best)
      return hist.bin_width * static_cast<double>(lag);
  return hist.bin_width * static_cast<double>(bins - 1);
}

std::vector<BatchEstimate> batch_estimate(std::span<const double> frame_toas,
                                          std::int64_t batch_size,
                                          double rep_period,
                                          const ImpulseResponse& irf,
                                          double bin_width) {
  if (batch_size < 1)
    throw InvalidInputError("batch_estimate: batch_size must be >= 1");

  std::vector<BatchEstimate> out;
  const std::int64_t n = static_cast<std::int64_t>(frame_toas.size());
  std::optional<double> previous;

  for (std::int64_t begin = 0, batch = 0; begin < n; begin += batch_size, ++batch) {
    const std::int64_t end = std::min(begin + batch_size, n);
    std::vector<double> toas;
    for (std::int64_t i = begin; i < end; ++i)
      if (!std::isnan(frame_toas[static_cast<std::size_t>(i)]))
        toas.push_back(frame_toas[static_cast<std::size_t>(i)]);

    BatchEstimate b;
    b.batch = batch;
    b.frame_begin = begin;
    b.frame_end = end;
    const auto estimate =
        xcorr_depth(build_histogram(toas, rep_period, bin_width), irf);
    if (estimate) {
      b.has_estimate = true;
      b.estimate = *estimate;
      previous = estimate;
    } else if (previous) {
      b.has_estimate = true;
      b.carried = true;
      b.estimate = *previous;
    }
    out.push_back(b);
  }
  return out;
}

}  // namespace o3dsp
