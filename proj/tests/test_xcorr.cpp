#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "o3dsp/simulator.hpp"
#include "o3dsp/xcorr.hpp"
#include "oracle_utils.hpp"

using namespace o3dsp;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Histogram whose counts sample the impulse response around `center`,
/// on the same circular bin-center grid the estimator uses.
ToAHistogram irf_histogram(double center, double rep_period,
                           const ImpulseResponse& irf) {
  const int bins = static_cast<int>(rep_period);
  ToAHistogram hist;
  hist.bin_width = 1.0;
  hist.counts.assign(bins, 0);
  for (int k = 0; k < bins; ++k) {
    double offset = k + 0.5 - center;
    while (offset >= rep_period / 2.0) offset -= rep_period;
    while (offset < -rep_period / 2.0) offset += rep_period;
    hist.counts[k] = static_cast<std::uint32_t>(
        std::lround(1e6 * irf.density(offset)));
  }
  return hist;
}

}  // namespace

TEST_CASE("build_histogram") {
  SUBCASE("single ToA lands in its floor bin") {
    const double toa = 310.4;
    const ToAHistogram h = build_histogram({&toa, 1}, 1500.0, 1.0);
    REQUIRE(h.counts.size() == 1500);
    CHECK(h.counts[310] == 1);
    CHECK(h.total() == 1);
  }

  SUBCASE("empty batch gives an all-zero histogram") {
    const ToAHistogram h = build_histogram({}, 1500.0, 1.0);
    CHECK(h.total() == 0);
    CHECK(h.counts.size() == 1500);
  }

  SUBCASE("counts are conserved") {
    std::vector<double> toas;
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1500.0);
    for (int i = 0; i < 333; ++i) toas.push_back(u(gen));
    CHECK(build_histogram(toas, 1500.0, 1.0).total() == 333);
    CHECK(build_histogram(toas, 1500.0, 2.5).total() == 333);
  }

  SUBCASE("out-of-range ToA is rejected") {
    const double toa = 1500.0;
    CHECK_THROWS_AS(build_histogram({&toa, 1}, 1500.0, 1.0), InvalidInputError);
  }
}

TEST_CASE("xcorr_depth") {
  const ImpulseResponse irf{200.0};

  SUBCASE("discretized impulse response peaks at its own center") {
    const ToAHistogram h = irf_histogram(300.0, 1500.0, irf);
    const auto est = xcorr_depth(h, irf);
    REQUIRE(est.has_value());
    CHECK(*est == 300.0);
  }

  SUBCASE("flat histogram ties break to lag 0") {
    ToAHistogram h;
    h.bin_width = 1.0;
    h.counts.assign(1500, 7);
    const auto est = xcorr_depth(h, irf);
    REQUIRE(est.has_value());
    CHECK(*est == 0.0);
  }

  SUBCASE("empty histogram yields no estimate") {
    ToAHistogram h;
    h.bin_width = 1.0;
    h.counts.assign(1500, 0);
    CHECK_FALSE(xcorr_depth(h, irf).has_value());
  }

  SUBCASE("scale invariance of the argmax") {
    ToAHistogram h = irf_histogram(872.0, 1500.0, irf);
    const auto base = xcorr_depth(h, irf);
    for (auto& c : h.counts) c *= 3;
    CHECK(*xcorr_depth(h, irf) == *base);
  }

  SUBCASE("shift covariance is exact for circular correlation") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 1500.0);
    std::vector<double> toas;
    for (int i = 0; i < 40; ++i)
      toas.push_back(std::floor(u(gen)) + 0.25);  // keep clear of bin edges
    // concentrate some mass so the peak is unambiguous
    for (int i = 0; i < 30; ++i) toas.push_back(412.25 + (i % 5));

    const auto base = xcorr_depth(build_histogram(toas, 1500.0, 1.0), irf);
    for (int shift : {1, 17, 600, 1499}) {
      std::vector<double> shifted;
      for (double t : toas)
        shifted.push_back(std::fmod(t + shift, 1500.0));
      const auto moved = xcorr_depth(build_histogram(shifted, 1500.0, 1.0), irf);
      CHECK(std::fmod(*base + shift, 1500.0) == doctest::Approx(*moved));
    }
  }

  SUBCASE("accuracy on simulated batches (Monte-Carlo oracle)") {
    // pi = 0.5, w = 0.8, d = 300, batches of 100 frames
    SystemConfig sys;
    sys.rep_period = 1500.0;
    sys.irf_variance = 200.0;
    GroundTruthFrame truth;
    truth.height = 1;
    truth.width = 1;
    truth.range = Eigen::ArrayXd::Constant(1, 300.0);
    truth.signal_frac = Eigen::ArrayXd::Constant(1, 0.8);
    truth.detect_prob = Eigen::ArrayXd::Constant(1, 0.5);

    std::vector<double> errors;
    for (int batch = 0; batch < 500; ++batch) {
      std::vector<double> toas;
      for (int n = 0; n < 100; ++n) {
        const FrameEvents ev =
            sample_frame(truth, sys, 9000 + batch, n);
        if (!ev.detections.empty()) toas.push_back(ev.detections[0].toa);
      }
      const auto est = xcorr_depth(build_histogram(toas, 1500.0, 1.0), irf);
      REQUIRE(est.has_value());
      errors.push_back(std::abs(*est - 300.0));
    }
    CHECK(median(errors) <= 2.0 * std::sqrt(200.0));
    const auto within = std::count_if(errors.begin(), errors.end(), [](double e) {
      return e <= 3.0 * std::sqrt(200.0);
    });
    CHECK(static_cast<double>(within) >= 0.99 * 500);
  }
}

TEST_CASE("batch_estimate") {
  const ImpulseResponse irf{200.0};
  const double nan = std::numeric_limits<double>::quiet_NaN();

  SUBCASE("one batch covering the whole stream") {
    std::vector<double> toas(50, nan);
    toas[10] = 200.25;
    toas[30] = 201.75;
    const auto batches = batch_estimate(toas, 50, 1500.0, irf);
    REQUIRE(batches.size() == 1);
    CHECK(batches[0].has_estimate);
    CHECK_FALSE(batches[0].carried);
    CHECK(batches[0].frame_begin == 0);
    CHECK(batches[0].frame_end == 50);
  }

  SUBCASE("empty batches carry the previous estimate forward") {
    std::vector<double> toas(30, nan);
    toas[2] = 500.5;
    toas[5] = 499.5;  // batch 0 has data; batches 1 and 2 are empty
    const auto batches = batch_estimate(toas, 10, 1500.0, irf);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].has_estimate);
    CHECK_FALSE(batches[0].carried);
    CHECK(batches[1].has_estimate);
    CHECK(batches[1].carried);
    CHECK(batches[1].estimate == batches[0].estimate);
    CHECK(batches[2].carried);
  }

  SUBCASE("a leading empty batch has no estimate") {
    std::vector<double> toas(20, nan);
    toas[15] = 321.5;
    const auto batches = batch_estimate(toas, 10, 1500.0, irf);
    REQUIRE(batches.size() == 2);
    CHECK_FALSE(batches[0].has_estimate);
    CHECK(batches[1].has_estimate);
  }

  SUBCASE("short tail batch is still estimated") {
    std::vector<double> toas(25, nan);
    toas[22] = 700.5;
    const auto batches = batch_estimate(toas, 10, 1500.0, irf);
    REQUIRE(batches.size() == 3);
    CHECK(batches[2].frame_end == 25);
    CHECK(batches[2].has_estimate);
  }

  SUBCASE("all-background streams cannot find the target") {
    // w = 0: detection times are uniform; the estimator's RMSE against the
    // (irrelevant) true range must stay above half the uniform-guess RMSE.
    SystemConfig sys;
    sys.rep_period = 1500.0;
    sys.irf_variance = 200.0;
    GroundTruthFrame truth;
    truth.height = 1;
    truth.width = 1;
    truth.range = Eigen::ArrayXd::Constant(1, 300.0);
    truth.signal_frac = Eigen::ArrayXd::Zero(1);
    truth.detect_prob = Eigen::ArrayXd::Constant(1, 0.5);

    std::vector<double> toas;
    for (int n = 0; n < 2000; ++n) {
      const FrameEvents ev = sample_frame(truth, sys, 77, n);
      toas.push_back(ev.detections.empty() ? nan : ev.detections[0].toa);
    }
    const auto batches = batch_estimate(toas, 10, 1500.0, irf);
    double sq = 0.0;
    int count = 0;
    for (const auto& b : batches)
      if (b.has_estimate) {
        sq += (b.estimate - 300.0) * (b.estimate - 300.0);
        ++count;
      }
    REQUIRE(count > 100);
    const double rmse = std::sqrt(sq / count);
    CHECK(rmse >= 0.5 * 1500.0 / std::sqrt(12.0));
  }

  SUBCASE("small batches track noisily, large batches smoothly") {
    SystemConfig sys;
    sys.rep_period = 1500.0;
    sys.irf_variance = 200.0;
    GroundTruthFrame truth;
    truth.height = 1;
    truth.width = 1;
    truth.range = Eigen::ArrayXd::Constant(1, 620.0);
    truth.signal_frac = Eigen::ArrayXd::Constant(1, 0.5);
    truth.detect_prob = Eigen::ArrayXd::Constant(1, 0.5);

    std::vector<double> toas;
    for (int n = 0; n < 2000; ++n) {
      const FrameEvents ev = sample_frame(truth, sys, 13, n);
      toas.push_back(ev.detections.empty() ? nan : ev.detections[0].toa);
    }
    const auto noisy = batch_estimate(toas, 10, 1500.0, irf);
    const auto smooth = batch_estimate(toas, 100, 1500.0, irf);
    std::vector<double> err_noisy, err_smooth;
    for (const auto& b : noisy)
      if (b.has_estimate && !b.carried)
        err_noisy.push_back(std::abs(b.estimate - 620.0));
    for (const auto& b : smooth)
      if (b.has_estimate)
        err_smooth.push_back(std::abs(b.estimate - 620.0));
    CHECK(median(err_noisy) > median(err_smooth));
  }

  SUBCASE("bad batch size") {
    std::vector<double> toas(5, nan);
    CHECK_THROWS_AS(batch_estimate(toas, 0, 1500.0, irf), InvalidInputError);
  }
}
