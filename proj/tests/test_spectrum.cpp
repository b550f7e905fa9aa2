#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hrtrack/spectrum.hpp"

#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace hrtrack;

TEST_CASE("burg order 1 recovers an AR(1) pole") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.1);
  Eigen::VectorXd x(5000);
  x[0] = noise(rng);
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    x[i] = 0.9 * x[i - 1] + noise(rng);
  }
  const ArModel model = fit_ar(testutil::make_frame(x), 1);
  REQUIRE(model.coeffs.size() == 2);
  CHECK(model.coeffs[0] == 1.0);
  CHECK(model.coeffs[1] == doctest::Approx(-0.9).epsilon(0.06));

  // Closed-form oracle: the lag-1 autocorrelation ratio.
  const double r0 = x.squaredNorm();
  const double r1 = x.head(x.size() - 1).dot(x.tail(x.size() - 1));
  CHECK(model.coeffs[1] == doctest::Approx(-r1 / r0).epsilon(0.05));
}

TEST_CASE("burg rejects degenerate frames") {
  CHECK_THROWS_AS(fit_ar(testutil::make_frame(Eigen::VectorXd::Constant(1000, 3.0)), 10),
                  std::runtime_error);
  CHECK_THROWS_AS(fit_ar(testutil::make_frame(Eigen::VectorXd::Zero(1000)), 10),
                  std::runtime_error);
  CHECK_THROWS_AS(fit_ar(testutil::make_frame(Eigen::VectorXd::Zero(100)), 500),
                  std::invalid_argument);
}

TEST_CASE("burg order 500 on a noisy frame stays stable") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> noise(0.0, 0.3);
  Eigen::VectorXd x = testutil::tone(1.4, 1.0, 125.0, 1000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += noise(rng);

  const ArModel model = fit_ar(testutil::make_frame(x), 500);
  CHECK(model.coeffs.size() == 501);
  CHECK(model.reflections.size() == 500);
  CHECK(model.reflections.cwiseAbs().maxCoeff() < 1.0);
  CHECK(model.noise_variance > 0.0);
}

TEST_CASE("ar spectrum peaks where the periodogram does") {
  const Eigen::VectorXd x = testutil::tone(2.0, 1.0, 125.0, 1000, 0.7);
  const ArModel model = fit_ar(testutil::make_frame(x), 500);
  const SpectrumEstimate spec = ar_psd(model);

  CHECK(spec.n_points() == 32768);
  CHECK(spec.magnitudes.maxCoeff() == 1.0);
  CHECK(spec.magnitudes.minCoeff() >= 0.0);

  const Eigen::VectorXd pgram = testutil::periodogram_magnitude(x, 32768);
  const int ar_argmax = testutil::argmax_range(spec.magnitudes, 0, 16384);
  const int pg_argmax = testutil::argmax_range(pgram, 0, 16384);
  CHECK(std::abs(ar_argmax - pg_argmax) <= 2);
  CHECK(std::abs(ar_argmax - 2.0 * 32768.0 / 125.0) < 3.0);
}

TEST_CASE("two equal tones give two local maxima near their grid locations") {
  const Eigen::VectorXd x = testutil::tone(1.25, 1.0, 125.0, 1000) +
                            testutil::tone(3.0, 1.0, 125.0, 1000, 1.1);
  const ArModel model = fit_ar(testutil::make_frame(x), 500);
  const SpectrumEstimate spec = ar_psd(model);

  const auto peaks = find_peaks(spec, 0.6, 4.0);
  REQUIRE(peaks.size() >= 2);
  bool near_first = false;
  bool near_second = false;
  for (const SpectralPeak& p : peaks) {
    if (std::abs(p.index - 328) <= 3 && p.magnitude > 0.3) near_first = true;
    if (std::abs(p.index - 786) <= 3 && p.magnitude > 0.3) near_second = true;
  }
  CHECK(near_first);
  CHECK(near_second);
}

TEST_CASE("find_peaks matches the worked example") {
  Eigen::VectorXd m(10);
  m << 0.1, 0.5, 0.1, 1.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0;
  const SpectrumEstimate spec = testutil::spectrum_of(m);
  const auto peaks = find_peaks(spec, 0.0, 4.0);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].index == 1);
  CHECK(peaks[0].magnitude == doctest::Approx(0.5));
  CHECK(peaks[0].prominence == doctest::Approx(0.4));
  CHECK(peaks[1].index == 3);
  CHECK(peaks[1].prominence == doctest::Approx(0.9));
  CHECK(peaks[0].width > 0.0);
  CHECK(peaks[1].width > 0.0);
}

TEST_CASE("find_peaks edge behaviors") {
  Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(16, 0.0, 1.0);
  CHECK(find_peaks(testutil::spectrum_of(ramp), 0.0, 7.0).empty());

  Eigen::VectorXd plateau(8);
  plateau << 0.1, 0.8, 0.8, 0.1, 0.0, 0.0, 0.0, 0.0;
  const auto peaks = find_peaks(testutil::spectrum_of(plateau), 0.0, 3.0);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].index == 1);  // leftmost plateau sample

  CHECK_THROWS_AS(find_peaks(testutil::spectrum_of(plateau), 3.0, 3.0),
                  std::invalid_argument);
}

TEST_CASE("find_peaks equals the brute-force definition on random arrays") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> value(0.0, 1.0);
  std::uniform_int_distribution<int> length(32, 2000);
  std::uniform_int_distribution<int> quantize(0, 1);

  for (int trial = 0; trial < 30; ++trial) {
    const int n = length(rng);
    Eigen::VectorXd m(n);
    const bool plateaus = quantize(rng) == 1;
    for (int i = 0; i < n; ++i) {
      m[i] = plateaus ? std::round(value(rng) * 8.0) / 8.0 : value(rng);
    }
    const SpectrumEstimate spec = testutil::spectrum_of(m);
    const int hi = n / 2;
    const auto fast = find_peaks(spec, 0.0, static_cast<double>(hi));
    const auto brute = testutil::brute_force_peaks(m, 0, hi);

    REQUIRE(fast.size() == brute.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i].index == brute[i].index);
      CHECK(fast[i].prominence == brute[i].prominence);
      CHECK(fast[i].prominence <= fast[i].magnitude);
      CHECK(fast[i].width > 0.0);
    }
  }
}

TEST_CASE("index/bpm conversions") {
  CHECK(index_to_bpm(328, 32768, 125.0) == doctest::Approx(75.0732421875));
  CHECK(index_to_bpm(0, 32768, 125.0) == 0.0);
  for (int idx : {1, 100, 328, 5000}) {
    CHECK(bpm_to_index(index_to_bpm(idx, 32768, 125.0), 32768, 125.0) ==
          doctest::Approx(idx).epsilon(1e-12));
  }
  CHECK_THROWS_AS(index_to_bpm(-1, 32768, 125.0), std::invalid_argument);
  CHECK_THROWS_AS(index_to_bpm(20000, 32768, 125.0), std::invalid_argument);
  CHECK_THROWS_AS(bpm_to_index(0.0, 32768, 125.0), std::invalid_argument);
}
