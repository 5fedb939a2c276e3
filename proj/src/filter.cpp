#include "o3dsp/filter.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace o3dsp {

namespace {

bool probability_open_unit(double p) { return p > 0.0 && p <= 1.0; }

/// Median of the first n entries of a small scratch buffer.
double median_of(double* values, int n) {
  std::sort(values, values + n);
  return (n % 2 == 1) ? values[n / 2]
                      : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

void FilterParams::validate() const {
  if (!probability_open_unit(self_prob))
    throw InvalidInputError("FilterParams: self_prob must be in (0,1]");
  if (!probability_open_unit(attenuation))
    throw InvalidInputError("FilterParams: attenuation must be in (0,1]");
  if (!probability_open_unit(edge_extra_weight))
    throw InvalidInputError("FilterParams: edge_extra_weight must be in (0,1]");
  if (!probability_open_unit(init_weight))
    throw InvalidInputError("FilterParams: init_weight must be in (0,1]");
  if (!probability_open_unit(occlusion_weight))
    throw InvalidInputError("FilterParams: occlusion_weight must be in (0,1]");
  if (!(rw_variance >= 0.0) || !std::isfinite(rw_variance))
    throw InvalidInputError("FilterParams: rw_variance must be >= 0");
  if (!(smooth_std >= 0.0) || !std::isfinite(smooth_std))
    throw InvalidInputError("FilterParams: smooth_std must be >= 0");
  if (!(edge_extra_variance > 0.0) || !(init_variance > 0.0))
    throw InvalidInputError("FilterParams: variances must be positive");
  if (!std::isfinite(init_mean))
    throw InvalidInputError("FilterParams: init_mean must be finite");
}

FilterParams default_filter_params(const SystemConfig& sys) {
  sys.validate();
  FilterParams p;
  p.init_mean = sys.rep_period / 2.0;
  p.init_variance = p.init_mean * p.init_mean;
  p.edge_extra_variance = (sys.rep_period / 4.0) * (sys.rep_period / 4.0);
  return p;
}

void validate_events(const FrameEvents& events, int height, int width,
                     double rep_period) {
  const std::uint32_t pixel_count =
      static_cast<std::uint32_t>(height) * static_cast<std::uint32_t>(width);
  std::int64_t last = -1;
  for (const Detection& d : events.detections) {
    if (d.pixel >= pixel_count)
      throw InvalidInputError("FrameEvents: pixel index out of range");
    if (static_cast<std::int64_t>(d.pixel) <= last)
      throw InvalidInputError("FrameEvents: pixel indices not strictly ascending");
    if (!(d.toa >= 0.0) || !(d.toa < rep_period))
      throw InvalidInputError("FrameEvents: toa outside [0, rep_period)");
    last = d.pixel;
  }
}

BeliefGrid init_state(int height, int width, const SystemConfig& sys,
                      const FilterParams& params) {
  sys.validate();
  params.validate();
  if (height <= 0 || width <= 0)
    throw InvalidInputError("init_state: dims must be positive");
  BeliefGrid grid;
  grid.height = height;
  grid.width = width;
  grid.frame_index = 0;
  const int n = height * width;
  grid.mean = Eigen::ArrayXd::Constant(n, params.init_mean);
  grid.variance = Eigen::ArrayXd::Constant(n, params.init_variance);
  grid.wbar = Eigen::ArrayXd::Constant(n, params.init_weight);
  return grid;
}

MixtureBelief predict_prior(const BeliefGrid& grid, int pixel,
                            const FilterParams& params) {
  if (pixel < 0 || pixel >= grid.pixels())
    throw InvalidInputError("predict_prior: pixel out of range");

  MixtureBelief prior;
  const double g2 = params.rw_variance;

  if (params.neighborhood == Neighborhood::kSelfOnly) {
    prior.push_back({1.0, grid.mean[pixel], grid.variance[pixel] + g2});
    return prior;
  }

  const int r = pixel / grid.width;
  const int c = pixel % grid.width;
  const double neighbor_weight = (1.0 - params.self_prob) / 4.0;

  prior.push_back({params.self_prob, grid.mean[pixel], grid.variance[pixel] + g2});

  static constexpr int kOffsets[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  int present = 1;
  for (const auto& off : kOffsets) {
    const int rr = r + off[0];
    const int cc = c + off[1];
    if (rr < 0 || rr >= grid.height || cc < 0 || cc >= grid.width) continue;
    const int q = rr * grid.width + cc;
    prior.push_back({neighbor_weight, grid.mean[q], grid.variance[q] + g2});
    ++present;
  }

  const bool border = present < 5;
  if (border)
    prior.push_back({params.edge_extra_weight, grid.mean[pixel],
                     params.edge_extra_variance});

  if (params.occlusion_component_enabled) {
    // Wide component at the neighborhood median, spread set by the
    // dispersion of the neighbor means around it.
    double means[5];
    for (int i = 0; i < present; ++i) means[i] = prior[i].mean;
    const double med = median_of(means, present);
    double dispersion = 0.0;
    for (int i = 0; i < present; ++i)
      dispersion += (prior[i].mean - med) * (prior[i].mean - med);
    dispersion /= present;
    prior.push_back({params.occlusion_weight, med, dispersion + g2});
  }

  if (border || params.occlusion_component_enabled) normalize_mixture(prior);

  return prior;
}

PixelUpdate update_pixel(const MixtureBelief& prior, std::optional<double> toa,
                         double wbar, const SystemConfig& sys) {
  if (!(wbar >= 0.0 && wbar <= 1.0))
    throw InvalidInputError("update_pixel: wbar outside [0,1]");

  if (!toa) return {prior, wbar};

  if (!(*toa >= 0.0) || !(*toa < sys.rep_period))
    throw InvalidInputError("update_pixel: toa outside [0, rep_period)");

  const ImpulseResponse irf{sys.irf_variance};
  const double background_factor = (1.0 - wbar) / sys.rep_period;

  MixtureBelief post;
  for (const MixtureComponent& comp : prior) {
    const SignalUpdate su = signal_component_update(comp, *toa, irf);
    post.push_back(
        {comp.weight * wbar * su.evidence, su.updated.mean, su.updated.variance});
    post.push_back({comp.weight * background_factor, comp.mean, comp.variance});
  }
  normalize_mixture(post);

  double what = 0.0;
  for (int i = 0; i < post.size(); i += 2) what += post[i].weight;
  return {post, std::min(what, 1.0)};
}

Eigen::ArrayXd update_weights(const Eigen::ArrayXd& wbar,
                              const Eigen::ArrayXd& what,
                              const FilterParams& params) {
  if (wbar.size() != what.size())
    throw InvalidInputError("update_weights: shape mismatch");
  const double a = params.attenuation;
  return (1.0 - a) * wbar + a * what;
}

Eigen::ArrayXd smooth_weights(const Eigen::ArrayXd& wbar, int height,
                              int width, double smooth_std) {
  if (!(smooth_std >= 0.0))
    throw InvalidInputError("smooth_weights: smooth_std must be >= 0");
  if (wbar.size() != static_cast<Eigen::Index>(height) * width)
    throw InvalidInputError("smooth_weights: shape mismatch");
  if (smooth_std == 0.0) return wbar;

  const int radius = std::max(1, static_cast<int>(std::floor(3.0 * smooth_std)));
  Eigen::ArrayXd taps(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i)
    taps[i + radius] = std::exp(-0.5 * i * i / (smooth_std * smooth_std));
  taps /= taps.sum();

  const auto clamp = [](int v, int hi) { return std::clamp(v, 0, hi); };

  Eigen::ArrayXd horiz(wbar.size());
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += taps[i + radius] * wbar[r * width + clamp(c + i, width - 1)];
      horiz[r * width + c] = acc;
    }

  Eigen::ArrayXd out(wbar.size());
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += taps[i + radius] * horiz[clamp(r + i, height - 1) * width + c];
      out[r * width + c] = acc;
    }
  return out;
}

BeliefGrid step_frame(const BeliefGrid& grid, const FrameEvents& events,
                      const SystemConfig& sys, const FilterParams& params,
                      int workers) {
  if (events.frame_index != grid.frame_index + 1)
    throw InvalidInputError("step_frame: events frame index must be grid frame + 1");
  validate_events(events, grid.height, grid.width, sys.rep_period);

  const int n = grid.pixels();

  // Scatter the sparse detections; NaN marks "no detection".
  Eigen::ArrayXd toa = Eigen::ArrayXd::Constant(
      n, std::numeric_limits<double>::quiet_NaN());
  for (const Detection& d : events.detections) toa[d.pixel] = d.toa;

  BeliefGrid out;
  out.height = grid.height;
  out.width = grid.width;
  out.frame_index = grid.frame_index + 1;
  out.mean.resize(n);
  out.variance.resize(n);
  Eigen::ArrayXd what(n);

  std::exception_ptr failure;

  const auto process_pixel = [&](int p) {
    const MixtureBelief prior = predict_prior(grid, p, params);
    const std::optional<double> event =
        std::isnan(toa[p]) ? std::nullopt : std::optional<double>(toa[p]);
    const PixelUpdate pu = update_pixel(prior, event, grid.wbar[p], sys);
    const GaussianBelief belief = adf_project(pu.posterior);
    out.mean[p] = belief.mean;
    out.variance[p] = belief.variance;
    what[p] = pu.what;
  };

#ifdef _OPENMP
  if (workers != 1) {
    const int threads = workers > 1 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int p = 0; p < n; ++p) {
      try {
        process_pixel(p);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
  } else
#endif
  {
    for (int p = 0; p < n; ++p) process_pixel(p);
  }
  if (failure) std::rethrow_exception(failure);

  out.wbar = update_weights(grid.wbar, what, params);
  if (params.smooth_std > 0.0)
    out.wbar = smooth_weights(out.wbar, out.height, out.width, params.smooth_std);
  return out;
}

}  // namespace o3dsp
