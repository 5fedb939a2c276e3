#pragma once

#include <cmath>

#include "o3dsp/types.hpp"

namespace o3dsp {

/// Gaussian density N(x; mean, variance).
inline double gaussian_density(double x, double mean, double variance) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / variance) /
         std::sqrt(2.0 * kPi * variance);
}

struct SignalUpdate {
  double evidence = 0.0;      ///< N(toa; mean, variance + s^2)
  MixtureComponent updated;   ///< conjugate posterior component, weight untouched
};

/// Conjugate signal branch of a detection update against one prior
/// component: N(d; mu, sigma^2) * N(toa; d, s^2) factors into the
/// evidence N(toa; mu, sigma^2 + s^2) and a Gaussian in d with precision
/// 1/sigma^2 + 1/s^2 and precision-weighted mean.
inline SignalUpdate signal_component_update(const MixtureComponent& comp,
                                            double toa,
                                            const ImpulseResponse& irf) {
  if (!std::isfinite(comp.mean) || !std::isfinite(comp.variance) ||
      !std::isfinite(toa) || !(comp.variance > 0.0) || !(irf.variance > 0.0))
    throw InvalidInputError("signal_component_update: non-finite or non-positive input");

  SignalUpdate out;
  out.evidence = gaussian_density(toa, comp.mean, comp.variance + irf.variance);
  const double precision = 1.0 / comp.variance + 1.0 / irf.variance;
  out.updated.variance = 1.0 / precision;
  out.updated.mean =
      out.updated.variance * (comp.mean / comp.variance + toa / irf.variance);
  out.updated.weight = comp.weight;
  return out;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of a normalized mixture:
/// mean = sum w_k mu_k, variance = sum w_k (sigma_k^2 + (mu_k - mean)^2).
/// The centered form is algebraically equal to E[X^2] - mean^2 but does
/// not cancel when the variance is many orders below mean^2.
inline Moments mixture_moments(const MixtureBelief& mix) {
  if (mix.empty()) throw InvalidInputError("mixture_moments: empty mixture");
  double mean = 0.0;
  for (const auto& c : mix) mean += c.weight * c.mean;
  double variance = 0.0;
  for (const auto& c : mix) {
    const double d = c.mean - mean;
    variance += c.weight * (c.variance + d * d);
  }
  return {mean, variance};
}

/// KL-optimal single-Gaussian approximation of a mixture (moment matching).
inline GaussianBelief adf_project(const MixtureBelief& mix) {
  const Moments m = mixture_moments(mix);
  if (!(m.variance > 0.0) || !std::isfinite(m.variance) || !std::isfinite(m.mean))
    throw DegenerateBeliefError("adf_project: non-positive or non-finite projected variance");
  return {m.mean, m.variance};
}

/// Rescales component weights to sum to one, preserving order.
/// Returns the normalizing constant (total raw mass).
inline double normalize_mixture(MixtureBelief& mix) {
  if (mix.empty()) throw InvalidInputError("normalize_mixture: empty mixture");
  double total = 0.0;
  for (const auto& c : mix) total += c.weight;
  if (!(total > 1e-300) || !std::isfinite(total))
    throw DegeneratePosteriorError("normalize_mixture: total mass vanished");
  const double inv = 1.0 / total;
  for (auto& c : mix) c.weight *= inv;
  return total;
}

}  // namespace o3dsp
