#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "o3dsp/filter.hpp"
#include "o3dsp/simulator.hpp"
#include "oracle_utils.hpp"

using namespace o3dsp;

namespace {

SystemConfig desk_system() {
  SystemConfig sys;
  sys.rep_period = 1500.0;
  sys.irf_variance = 200.0;
  return sys;
}

FrameEvents no_events(std::int64_t frame) { return {frame, {}}; }

FrameEvents one_event(std::int64_t frame, std::uint32_t pixel, double toa) {
  return {frame, {{pixel, toa}}};
}

}  // namespace

TEST_CASE("init_state fills the grid with the weakly-informative start") {
  const SystemConfig sys = desk_system();
  const FilterParams params = default_filter_params(sys);

  SUBCASE("defaults at T_r = 1500") {
    const BeliefGrid grid = init_state(4, 5, sys, params);
    CHECK(grid.frame_index == 0);
    CHECK(grid.pixels() == 20);
    CHECK((grid.mean == 750.0).all());
    CHECK((grid.variance == 562500.0).all());
    CHECK((grid.wbar == 0.5).all());
  }

  SUBCASE("1x1 grid holds a single belief") {
    const BeliefGrid grid = init_state(1, 1, sys, params);
    CHECK(grid.pixels() == 1);
    CHECK(grid.belief_at(0).mean == 750.0);
  }

  SUBCASE("the whole interval sits in the high-probability region") {
    // density ratio between the interval center and its endpoints
    const double center = gaussian_density(750.0, 750.0, 562500.0);
    const double endpoint = gaussian_density(0.0, 750.0, 562500.0);
    CHECK(center / endpoint <= std::exp(0.5) + 1e-12);
    CHECK(center / endpoint == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  }

  SUBCASE("bad dims are rejected") {
    CHECK_THROWS_AS(init_state(0, 5, sys, params), InvalidInputError);
  }
}

TEST_CASE("predict_prior") {
  const SystemConfig sys = desk_system();
  FilterParams params = default_filter_params(sys);
  params.rw_variance = 100.0;

  SUBCASE("self-only neighborhood is a single random-walk component") {
    params.neighborhood = Neighborhood::kSelfOnly;
    BeliefGrid grid = init_state(1, 1, sys, params);
    grid.mean[0] = 321.0;
    grid.variance[0] = 44.0;
    const MixtureBelief prior = predict_prior(grid, 0, params);
    REQUIRE(prior.size() == 1);
    CHECK(prior[0].weight == 1.0);
    CHECK(prior[0].mean == 321.0);
    CHECK(prior[0].variance == 144.0);
  }

  SUBCASE("interior pixel carries the published weights") {
    params.neighborhood = Neighborhood::kCross5;
    params.self_prob = 0.99;
    BeliefGrid grid = init_state(3, 3, sys, params);
    for (int p = 0; p < 9; ++p) {
      grid.mean[p] = 100.0 * p;
      grid.variance[p] = 10.0 + p;
    }
    const MixtureBelief prior = predict_prior(grid, 4, params);
    REQUIRE(prior.size() == 5);
    CHECK(prior[0].weight == doctest::Approx(0.99).epsilon(1e-15));
    for (int k = 1; k < 5; ++k)
      CHECK(prior[k].weight == doctest::Approx(0.0025).epsilon(1e-15));
    CHECK(prior[0].mean == 400.0);               // self
    CHECK(prior[1].mean == 100.0);               // up
    CHECK(prior[2].mean == 700.0);               // down
    CHECK(prior[3].mean == 300.0);               // left
    CHECK(prior[4].mean == 500.0);               // right
    CHECK(prior[0].variance == doctest::Approx(114.0));
    double total = 0.0;
    for (const auto& c : prior) total += c.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("border pixel gains the wide edge component and renormalizes") {
    params.neighborhood = Neighborhood::kCross5;
    BeliefGrid grid = init_state(3, 3, sys, params);
    const MixtureBelief prior = predict_prior(grid, 0, params);  // corner
    REQUIRE(prior.size() == 4);  // self + 2 neighbors + edge
    double total = 0.0;
    for (const auto& c : prior) total += c.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prior[3].variance == params.edge_extra_variance);
    CHECK(prior[3].mean == grid.mean[0]);
    // nominal masses: 0.99 self, 0.0025 x2 neighbors, 0.05 edge
    const double z = 0.99 + 2 * 0.0025 + 0.05;
    CHECK(prior[0].weight == doctest::Approx(0.99 / z).epsilon(1e-12));
    CHECK(prior[3].weight == doctest::Approx(0.05 / z).epsilon(1e-12));
  }

  SUBCASE("occlusion component is added behind the flag") {
    params.neighborhood = Neighborhood::kCross5;
    params.occlusion_component_enabled = true;
    BeliefGrid grid = init_state(3, 3, sys, params);
    for (int p = 0; p < 9; ++p) grid.mean[p] = 10.0 * p;
    const MixtureBelief prior = predict_prior(grid, 4, params);
    REQUIRE(prior.size() == 6);
    // median of {40, 10, 70, 30, 50}
    CHECK(prior[5].mean == 40.0);
    double total = 0.0;
    for (const auto& c : prior) total += c.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("moments match a Monte-Carlo oracle of the generative story") {
    params.neighborhood = Neighborhood::kCross5;
    params.self_prob = 0.9;
    params.rw_variance = 77.0;
    BeliefGrid grid = init_state(5, 5, sys, params);
    std::mt19937_64 gen(321);
    std::uniform_real_distribution<double> mean(200.0, 1200.0);
    std::uniform_real_distribution<double> var(10.0, 4000.0);
    for (int p = 0; p < 25; ++p) {
      grid.mean[p] = mean(gen);
      grid.variance[p] = var(gen);
    }
    const int pixel = 12;  // interior
    const auto m = mixture_moments(predict_prior(grid, pixel, params));

    // neighbor picked by nu, then diffused by the random walk
    const int ids[5] = {12, 7, 17, 11, 13};
    const double probs[5] = {0.9, 0.025, 0.025, 0.025, 0.025};
    std::discrete_distribution<int> pick(probs, probs + 5);
    std::normal_distribution<double> unit(0.0, 1.0);
    const std::uint64_t n = 10'000'000;
    std::vector<double> draws(n);
    double sum = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const int q = ids[pick(gen)];
      draws[i] = grid.mean[q] + std::sqrt(grid.variance[q]) * unit(gen) +
                 std::sqrt(params.rw_variance) * unit(gen);
      sum += draws[i];
    }
    const double mc_mean = sum / n;
    double m2 = 0.0, m4 = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const double d = draws[i] - mc_mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    const double mean_se = std::sqrt(m2 / n);
    const double var_se = std::sqrt((m4 - m2 * m2) / n);
    CHECK(std::abs(m.mean - mc_mean) <= 4.0 * mean_se);
    CHECK(std::abs(m.variance - m2) <= 4.0 * var_se);
  }

  SUBCASE("pixel out of range") {
    BeliefGrid grid = init_state(2, 2, sys, params);
    CHECK_THROWS_AS(predict_prior(grid, 4, params), InvalidInputError);
  }
}

TEST_CASE("update_pixel") {
  const SystemConfig sys = desk_system();

  SUBCASE("no event returns the prior and wbar") {
    MixtureBelief prior;
    prior.push_back({1.0, 300.0, 400.0});
    const auto [post, what] = update_pixel(prior, std::nullopt, 0.37, sys);
    CHECK(post.size() == 1);
    CHECK(post[0].mean == 300.0);
    CHECK(post[0].variance == 400.0);
    CHECK(what == 0.37);
  }

  SUBCASE("wbar = 0 leaves the prior untouched") {
    MixtureBelief prior;
    prior.push_back({0.25, 200.0, 50.0});
    prior.push_back({0.75, 900.0, 150.0});
    const auto [post, what] = update_pixel(prior, 777.0, 0.0, sys);
    CHECK(what == 0.0);
    const auto before = mixture_moments(prior);
    const auto after = mixture_moments(post);
    CHECK(after.mean == doctest::Approx(before.mean).epsilon(1e-14));
    CHECK(after.variance == doctest::Approx(before.variance).epsilon(1e-14));
    CHECK(post[0].weight == doctest::Approx(0.0));  // signal branch
    CHECK(post[1].weight == doctest::Approx(0.25).epsilon(1e-14));
  }

  SUBCASE("single-component detection example") {
    MixtureBelief prior;
    prior.push_back({1.0, 300.0, 400.0});
    const auto [post, what] = update_pixel(prior, 310.0, 0.8, sys);
    REQUIRE(post.size() == 2);
    CHECK(what == doctest::Approx(0.9890).epsilon(1e-3));
    // signal component carries the conjugate moments
    CHECK(post[0].variance == doctest::Approx(400.0 * 200.0 / 600.0).epsilon(1e-12));
  }

  SUBCASE("posterior matches the quadrature oracle on random instances") {
    std::mt19937_64 gen(1234);
    std::uniform_int_distribution<int> count(1, 6);
    std::uniform_real_distribution<double> mean(100.0, 1400.0);
    std::uniform_real_distribution<double> logvar(std::log(25.0), std::log(3e5));
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::uniform_real_distribution<double> toa_dist(0.0, 1500.0);
    std::uniform_real_distribution<double> wbar_dist(0.05, 0.95);

    for (int i = 0; i < 300; ++i) {
      oracle::MixtureSpec spec;
      MixtureBelief prior;
      const int m = count(gen);
      double total = 0.0;
      for (int k = 0; k < m; ++k) {
        spec.weights.push_back(weight(gen));
        spec.means.push_back(mean(gen));
        spec.variances.push_back(std::exp(logvar(gen)));
        total += spec.weights[k];
      }
      for (int k = 0; k < m; ++k) {
        spec.weights[k] /= total;
        prior.push_back({spec.weights[k], spec.means[k], spec.variances[k]});
      }
      const double toa = toa_dist(gen);
      const double wbar = wbar_dist(gen);

      const auto [post, what] = update_pixel(prior, toa, wbar, sys);
      const auto pm = mixture_moments(post);

      double lo, hi;
      spec.support(12.0, lo, hi);
      lo = std::min(lo, toa - 12.0 * std::sqrt(sys.irf_variance));
      hi = std::max(hi, toa + 12.0 * std::sqrt(sys.irf_variance));
      const auto joint = [&](double d) {
        const double lik = wbar * oracle::normal_pdf(toa, d, sys.irf_variance) +
                           (1.0 - wbar) / sys.rep_period;
        return spec.pdf(d) * lik;
      };
      const auto q = oracle::density_moments(joint, lo, hi, 30000);
      const double signal_mass =
          oracle::trapezoid(
              [&](double d) {
                return spec.pdf(d) * wbar *
                       oracle::normal_pdf(toa, d, sys.irf_variance);
              },
              lo, hi, 30000) /
          q.mass;

      CHECK(pm.mean == doctest::Approx(q.mean).epsilon(1e-8));
      CHECK(pm.variance == doctest::Approx(q.variance).epsilon(1e-8));
      CHECK(what == doctest::Approx(signal_mass).epsilon(1e-8));
      CHECK(what >= 0.0);
      CHECK(what <= 1.0);
    }
  }

  SUBCASE("invalid inputs") {
    MixtureBelief prior;
    prior.push_back({1.0, 300.0, 400.0});
    CHECK_THROWS_AS(update_pixel(prior, 1500.0, 0.5, sys), InvalidInputError);
    CHECK_THROWS_AS(update_pixel(prior, -1.0, 0.5, sys), InvalidInputError);
    CHECK_THROWS_AS(update_pixel(prior, 300.0, 1.5, sys), InvalidInputError);
  }
}

TEST_CASE("update_weights") {
  FilterParams params;

  SUBCASE("single step") {
    params.attenuation = 0.01;
    Eigen::ArrayXd wbar = Eigen::ArrayXd::Constant(3, 0.5);
    Eigen::ArrayXd what = Eigen::ArrayXd::Constant(3, 1.0);
    const Eigen::ArrayXd next = update_weights(wbar, what, params);
    CHECK(next[0] == doctest::Approx(0.505).epsilon(1e-15));
  }

  SUBCASE("alpha = 1 copies the instantaneous estimate") {
    params.attenuation = 1.0;
    Eigen::ArrayXd wbar = Eigen::ArrayXd::Constant(2, 0.1);
    Eigen::ArrayXd what(2);
    what << 0.9, 0.2;
    const Eigen::ArrayXd next = update_weights(wbar, what, params);
    CHECK(next[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(next[1] == doctest::Approx(0.2).epsilon(1e-15));
  }

  SUBCASE("geometric recursion reaches the closed form") {
    params.attenuation = 0.01;
    Eigen::ArrayXd wbar = Eigen::ArrayXd::Constant(1, 0.5);
    const Eigen::ArrayXd what = Eigen::ArrayXd::Constant(1, 0.8);
    for (int i = 0; i < 300; ++i) wbar = update_weights(wbar, what, params);
    const double closed = 0.8 - 0.3 * std::pow(0.99, 300);
    CHECK(closed == doctest::Approx(0.78529).epsilon(1e-4));
    CHECK(wbar[0] == doctest::Approx(closed).epsilon(1e-12));
  }

  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(update_weights(Eigen::ArrayXd::Zero(2),
                                   Eigen::ArrayXd::Zero(3), params),
                    InvalidInputError);
  }
}

TEST_CASE("smooth_weights") {
  SUBCASE("std = 0 is the identity") {
    Eigen::ArrayXd field = Eigen::ArrayXd::Random(12);
    const Eigen::ArrayXd out = smooth_weights(field, 3, 4, 0.0);
    CHECK((out == field).all());
  }

  SUBCASE("constant fields are fixed points") {
    const Eigen::ArrayXd field = Eigen::ArrayXd::Constant(25, 0.37);
    const Eigen::ArrayXd out = smooth_weights(field, 5, 5, 0.8);
    for (int i = 0; i < 25; ++i)
      CHECK(out[i] == doctest::Approx(0.37).epsilon(1e-14));
  }

  SUBCASE("unit impulse reproduces the normalized 3x3 kernel at std 0.5") {
    Eigen::ArrayXd field = Eigen::ArrayXd::Zero(25);
    field[12] = 1.0;  // center of a 5x5 grid
    const Eigen::ArrayXd out = smooth_weights(field, 5, 5, 0.5);

    // direct convolution oracle: taps exp(-i^2 / (2 * 0.25)), i in {-1,0,1}
    const double t1 = std::exp(-2.0);
    const double z = 1.0 + 2.0 * t1;
    const double k0 = 1.0 / z, k1 = t1 / z;
    const double expected[3] = {k1, k0, k1};
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const double want = expected[dr + 1] * expected[dc + 1];
        CHECK(out[(2 + dr) * 5 + (2 + dc)] == doctest::Approx(want).epsilon(1e-12));
      }
    CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("replicate padding against a direct 2-D oracle") {
    std::mt19937_64 gen(55);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int h = 6, w = 4;
    Eigen::ArrayXd field(h * w);
    for (int i = 0; i < h * w; ++i) field[i] = u(gen);
    const double std_dev = 1.2;
    const Eigen::ArrayXd out = smooth_weights(field, h, w, std_dev);

    const int radius = static_cast<int>(std::floor(3.0 * std_dev));
    std::vector<double> taps(2 * radius + 1);
    double z = 0.0;
    for (int i = -radius; i <= radius; ++i) {
      taps[i + radius] = std::exp(-0.5 * i * i / (std_dev * std_dev));
      z += taps[i + radius];
    }
    for (double& t : taps) t /= z;
    const auto clampi = [](int v, int hi) { return std::min(std::max(v, 0), hi); };
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          for (int j = -radius; j <= radius; ++j)
            acc += taps[i + radius] * taps[j + radius] *
                   field[clampi(r + i, h - 1) * w + clampi(c + j, w - 1)];
        CHECK(out[r * w + c] == doctest::Approx(acc).epsilon(1e-12));
      }
  }
}

TEST_CASE("step_frame") {
  const SystemConfig sys = desk_system();
  FilterParams params = default_filter_params(sys);

  SUBCASE("prediction-only step adds exactly gamma^2") {
    params.neighborhood = Neighborhood::kSelfOnly;
    params.rw_variance = 100.0;
    BeliefGrid grid = init_state(3, 3, sys, params);
    const BeliefGrid next = step_frame(grid, no_events(1), sys, params);
    CHECK(next.frame_index == 1);
    CHECK((next.mean == grid.mean).all());
    CHECK((next.variance == grid.variance + 100.0).all());
    // input grid untouched
    CHECK((grid.variance == 562500.0).all());
  }

  SUBCASE("frame index discipline") {
    BeliefGrid grid = init_state(2, 2, sys, params);
    CHECK_THROWS_AS(step_frame(grid, no_events(2), sys, params),
                    InvalidInputError);
    CHECK_THROWS_AS(step_frame(grid, one_event(1, 7, 100.0), sys, params),
                    InvalidInputError);
  }

  SUBCASE("determinism and worker-count invariance") {
    params.neighborhood = Neighborhood::kCross5;
    params.smooth_std = 0.5;
    BeliefGrid grid = init_state(8, 8, sys, params);
    FrameEvents events{1, {{3, 200.0}, {17, 640.5}, {40, 1203.25}, {63, 10.0}}};
    const BeliefGrid a = step_frame(grid, events, sys, params, 1);
    const BeliefGrid b = step_frame(grid, events, sys, params, 1);
    const BeliefGrid c = step_frame(grid, events, sys, params, 2);
    CHECK((a.mean == b.mean).all());
    CHECK((a.variance == b.variance).all());
    CHECK((a.wbar == b.wbar).all());
    CHECK((a.mean == c.mean).all());
    CHECK((a.variance == c.variance).all());
    CHECK((a.wbar == c.wbar).all());
  }

  SUBCASE("hand-computed single-pixel chain to 1e-12") {
    params.neighborhood = Neighborhood::kSelfOnly;
    params.rw_variance = 100.0;
    params.attenuation = 0.01;
    BeliefGrid grid = init_state(1, 1, sys, params);

    // frame 1: detection at 310 -- scripted predict/update/project
    const double v_prior = 562500.0 + 100.0;
    const double m_prior = 750.0;
    const double evid = oracle::normal_pdf(310.0, m_prior, v_prior + 200.0);
    const double sig_raw = 0.5 * evid;
    const double bg_raw = 0.5 / 1500.0;
    const double z = sig_raw + bg_raw;
    const double wsig = sig_raw / z;
    const double v_sig = 1.0 / (1.0 / v_prior + 1.0 / 200.0);
    const double m_sig = v_sig * (m_prior / v_prior + 310.0 / 200.0);
    const double mean1 = wsig * m_sig + (1.0 - wsig) * m_prior;
    const double var1 = wsig * (v_sig + (m_sig - mean1) * (m_sig - mean1)) +
                        (1.0 - wsig) * (v_prior + (m_prior - mean1) * (m_prior - mean1));
    const double wbar1 = 0.99 * 0.5 + 0.01 * wsig;

    grid = step_frame(grid, one_event(1, 0, 310.0), sys, params);
    CHECK(grid.mean[0] == doctest::Approx(mean1).epsilon(1e-12));
    CHECK(grid.variance[0] == doctest::Approx(var1).epsilon(1e-12));
    CHECK(grid.wbar[0] == doctest::Approx(wbar1).epsilon(1e-12));

    // frame 2: no detection -- pure prediction
    grid = step_frame(grid, no_events(2), sys, params);
    CHECK(grid.mean[0] == doctest::Approx(mean1).epsilon(1e-12));
    CHECK(grid.variance[0] == doctest::Approx(var1 + 100.0).epsilon(1e-12));
    CHECK(grid.wbar[0] == doctest::Approx(wbar1).epsilon(1e-12));

    // frame 3: detection at 295
    const double v2 = var1 + 100.0 + 100.0;
    const double m2 = mean1;
    const double w2 = grid.wbar[0];
    const double evid3 = oracle::normal_pdf(295.0, m2, v2 + 200.0);
    const double sig3 = w2 * evid3;
    const double bg3 = (1.0 - w2) / 1500.0;
    const double z3 = sig3 + bg3;
    const double wsig3 = sig3 / z3;
    const double v_sig3 = 1.0 / (1.0 / v2 + 1.0 / 200.0);
    const double m_sig3 = v_sig3 * (m2 / v2 + 295.0 / 200.0);
    const double mean3 = wsig3 * m_sig3 + (1.0 - wsig3) * m2;
    const double var3 =
        wsig3 * (v_sig3 + (m_sig3 - mean3) * (m_sig3 - mean3)) +
        (1.0 - wsig3) * (v2 + (m2 - mean3) * (m2 - mean3));
    const double wbar3 = 0.99 * w2 + 0.01 * wsig3;

    grid = step_frame(grid, one_event(3, 0, 295.0), sys, params);
    CHECK(grid.mean[0] == doctest::Approx(mean3).epsilon(1e-12));
    CHECK(grid.variance[0] == doctest::Approx(var3).epsilon(1e-12));
    CHECK(grid.wbar[0] == doctest::Approx(wbar3).epsilon(1e-12));
  }

  SUBCASE("conjugate collapse: exact recursive filtering") {
    // wbar pinned at 1 with gamma^2 = 0 never branches; after k detections
    // the belief is the exact conjugate posterior.
    params.neighborhood = Neighborhood::kSelfOnly;
    params.rw_variance = 0.0;
    params.init_weight = 1.0;
    params.attenuation = 0.5;
    BeliefGrid grid = init_state(1, 1, sys, params);

    const double v0 = params.init_variance;
    const double m0 = params.init_mean;
    long double toa_sum = 0.0L;
    const int k_max = 1000;
    for (int k = 1; k <= k_max; ++k) {
      const double toa = 300.0 + static_cast<double>((k * 37) % 21) - 10.0;
      toa_sum += toa;
      grid = step_frame(grid, one_event(k, 0, toa), sys, params);
    }
    const long double precision = 1.0L / v0 + static_cast<long double>(k_max) / 200.0L;
    const long double v_expect = 1.0L / precision;
    const long double m_expect = (m0 / v0 + toa_sum / 200.0L) / precision;
    CHECK(std::abs(grid.variance[0] - static_cast<double>(v_expect)) /
              static_cast<double>(v_expect) <= 1e-9);
    CHECK(std::abs(grid.mean[0] - static_cast<double>(m_expect)) /
              std::abs(static_cast<double>(m_expect)) <= 1e-9);
    CHECK(grid.wbar[0] == 1.0);
  }

  SUBCASE("what and wbar stay inside [0,1] under load") {
    params.neighborhood = Neighborhood::kCross5;
    params.smooth_std = 0.5;
    params.attenuation = 0.3;
    BeliefGrid grid = init_state(6, 6, sys, params);
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> toa(0.0, 1500.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int n = 1; n <= 200; ++n) {
      FrameEvents events;
      events.frame_index = n;
      for (std::uint32_t p = 0; p < 36; ++p)
        if (coin(gen) < 0.4) events.detections.push_back({p, toa(gen)});
      grid = step_frame(grid, events, sys, params);
      CHECK((grid.wbar >= 0.0).all());
      CHECK((grid.wbar <= 1.0).all());
      CHECK((grid.variance > 0.0).all());
    }
  }
}

TEST_CASE("faulty-pixel inpainting recovers the neighborhood consensus") {
  // 11x11 flat scene at d = 500, pi = 0.5, w = 0.8; the center pixel never
  // detects. Its belief must land within 3 posterior sigmas of the truth in
  // at least 95% of seeded runs.
  SystemConfig sys = desk_system();
  FilterParams params = default_filter_params(sys);
  params.neighborhood = Neighborhood::kCross5;
  params.self_prob = 0.99;
  params.rw_variance = 100.0;
  params.attenuation = 0.01;

  SceneSpec scene;
  scene.height = 11;
  scene.width = 11;
  scene.frames = 2000;
  SinePixelScene flat;
  flat.center = 500.0;
  flat.amplitude = 0.0;
  flat.detect_prob = 0.5;
  flat.w_schedule = {{0, 0.8}};
  scene.kind = flat;

  const int center = 5 * 11 + 5;
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GroundTruthFrame truth = scene_eval(scene, 0);
    truth.detect_prob[center] = 0.0;  // faulty pixel
    BeliefGrid grid = init_state(11, 11, sys, params);
    for (std::int64_t n = 0; n < scene.frames; ++n) {
      const FrameEvents events = sample_frame(truth, sys, seed, n);
      grid = step_frame(grid, events, sys, params);
    }
    const double err = std::abs(grid.mean[center] - 500.0);
    if (err <= 3.0 * std::sqrt(grid.variance[center])) ++hits;
  }
  CHECK(hits >= 19);
}

TEST_CASE("filter parameter validation") {
  CHECK_THROWS_AS(
      [] {
        FilterParams p;
        p.attenuation = 0.0;
        p.validate();
      }(),
      InvalidInputError);
  CHECK_THROWS_AS(
      [] {
        FilterParams p;
        p.self_prob = 1.5;
        p.validate();
      }(),
      InvalidInputError);
  CHECK_THROWS_AS(
      [] {
        FilterParams p;
        p.rw_variance = -1.0;
        p.validate();
      }(),
      InvalidInputError);

  const SystemConfig sys{2500.0, 200.0, 1.0, 1};
  const FilterParams p = default_filter_params(sys);
  CHECK(p.init_mean == 1250.0);
  CHECK(p.init_variance == doctest::Approx(1250.0 * 1250.0));
  CHECK(p.edge_extra_variance == doctest::Approx(625.0 * 625.0));
}
