#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hrtrack/preprocess.hpp"

#include "test_util.hpp"

#include <random>

using namespace hrtrack;

TEST_CASE("bandpass kills DC") {
  const Eigen::VectorXd dc = Eigen::VectorXd::Constant(1000, 5.0);
  const Eigen::VectorXd out = bandpass(dc, 0.8, 13.0, 125.0);
  CHECK(out.size() == 1000);
  CHECK(out.cwiseAbs().maxCoeff() < 0.05);  // < 0.01x the input amplitude
}

TEST_CASE("bandpass passes mid-band and rejects drift") {
  const double rate = 125.0;
  const Eigen::Index n = 60 * 125;

  const Eigen::VectorXd mid = testutil::tone(5.0, 1.0, rate, n);
  const Eigen::VectorXd mid_out = bandpass(mid, 0.8, 13.0, rate);
  const double ratio =
      testutil::fft_bin_magnitude(mid_out, 5.0, rate) /
      testutil::fft_bin_magnitude(mid, 5.0, rate);
  CHECK(ratio > 0.9);
  CHECK(ratio < 1.1);

  const Eigen::VectorXd slow = testutil::tone(0.1, 1.0, rate, n);
  const Eigen::VectorXd slow_out = bandpass(slow, 0.8, 13.0, rate);
  CHECK(slow_out.segment(n / 4, n / 2).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("bandpass validates edges") {
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(100);
  CHECK_THROWS_AS(bandpass(x, 0.0, 13.0, 125.0), std::invalid_argument);
  CHECK_THROWS_AS(bandpass(x, 13.0, 0.8, 125.0), std::invalid_argument);
  CHECK_THROWS_AS(bandpass(x, 0.8, 70.0, 125.0), std::invalid_argument);
}

TEST_CASE("bandpass is linear") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist(0.0, 1.0);
  const Eigen::Index n = 1500;
  Eigen::VectorXd x(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = dist(rng);
    y[i] = dist(rng);
  }
  const double a = 2.5;
  const double b = -0.75;
  const Eigen::VectorXd combined = bandpass(a * x + b * y, 0.8, 13.0, 125.0);
  const Eigen::VectorXd separate =
      a * bandpass(x, 0.8, 13.0, 125.0) + b * bandpass(y, 0.8, 13.0, 125.0);
  const double scale = separate.cwiseAbs().maxCoeff();
  CHECK((combined - separate).cwiseAbs().maxCoeff() / scale < 1e-9);
}

TEST_CASE("frame_stream splits with a 2 s slide") {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(1000, 0.0, 999.0);
  const auto frames = frame_stream(x, 125.0);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].samples.size() == 1000);
  CHECK(frames[0].window_index == 0);

  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(1250, 0.0, 1249.0);
  const auto two = frame_stream(y, 125.0, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].samples[0] == 0.0);
  CHECK(two[1].samples[0] == 250.0);
  CHECK(two[1].channel == 2);

  const Eigen::VectorXd z = Eigen::VectorXd::Zero(999);
  CHECK_THROWS_AS(frame_stream(z, 125.0), std::invalid_argument);
}

TEST_CASE("consecutive frames overlap by 6 s") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd x(2300);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = dist(rng);
  const auto frames = frame_stream(x, 125.0);
  REQUIRE(frames.size() >= 2);
  for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
    const Eigen::VectorXd tail = frames[i].samples.tail(750);
    const Eigen::VectorXd head = frames[i + 1].samples.head(750);
    CHECK((tail - head).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("harmonic_bandpass keeps harmonic bands only") {
  const double rate = 125.0;
  const Eigen::Index n = 1000;
  const Eigen::VectorXd mix =
      testutil::tone(1.25, 1.0, rate, n) + testutil::tone(5.75, 1.0, rate, n);
  const Frame frame = testutil::make_frame(mix);
  const Frame out = harmonic_bandpass(frame, 1.25);

  const double in_outband = testutil::fft_bin_magnitude(mix, 5.75, rate);
  const double out_outband = testutil::fft_bin_magnitude(out.samples, 5.75, rate);
  CHECK(out_outband / in_outband < 0.1);  // > 20 dB down

  const Eigen::VectorXd second = testutil::tone(2.5, 1.0, rate, n);
  const Frame harmonic = harmonic_bandpass(testutil::make_frame(second), 1.25);
  const double kept = testutil::fft_bin_magnitude(harmonic.samples, 2.5, rate) /
                      testutil::fft_bin_magnitude(second, 2.5, rate);
  CHECK(kept > 0.99);

  CHECK_THROWS_AS(harmonic_bandpass(frame, 20.0), std::invalid_argument);
}

TEST_CASE("harmonic_bandpass is idempotent") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd x(1000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = dist(rng);
  const Frame once = harmonic_bandpass(testutil::make_frame(x), 1.3);
  const Frame twice = harmonic_bandpass(once, 1.3);
  const double scale = once.samples.cwiseAbs().maxCoeff();
  CHECK((twice.samples - once.samples).cwiseAbs().maxCoeff() / scale < 1e-9);
}

TEST_CASE("sum_previous_frames adds element-wise") {
  const Eigen::VectorXd x = testutil::tone(1.25, 1.0, 125.0, 1000);
  const Frame cur = testutil::make_frame(x);
  const Frame zeros = testutil::make_frame(Eigen::VectorXd::Zero(1000));

  const Frame same = sum_previous_frames(cur, zeros, zeros);
  CHECK((same.samples - x).cwiseAbs().maxCoeff() == 0.0);

  const Frame triple = sum_previous_frames(cur, cur, cur);
  CHECK((triple.samples - 3.0 * x).cwiseAbs().maxCoeff() < 1e-12);

  const Frame shorter = testutil::make_frame(Eigen::VectorXd::Zero(999));
  CHECK_THROWS_AS(sum_previous_frames(cur, shorter, zeros), std::invalid_argument);

  Frame other_channel = zeros;
  other_channel.channel = 2;
  CHECK_THROWS_AS(sum_previous_frames(cur, other_channel, zeros), std::invalid_argument);
}

TEST_CASE("normalize_to_max") {
  Eigen::VectorXd v(3);
  v << 0.0, 2.0, -4.0;
  const Frame out = normalize_to_max(testutil::make_frame(v));
  CHECK(out.samples[0] == 0.0);
  CHECK(out.samples[1] == doctest::Approx(0.5));
  CHECK(out.samples[2] == doctest::Approx(-1.0));
  CHECK(out.samples.cwiseAbs().maxCoeff() == 1.0);

  const Frame again = normalize_to_max(out);
  CHECK((again.samples - out.samples).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(normalize_to_max(testutil::make_frame(Eigen::VectorXd::Zero(8))),
                  std::invalid_argument);
}

TEST_CASE("window_count formula") {
  CHECK(window_count(1000, 125.0) == 1);
  CHECK(window_count(1249, 125.0) == 1);
  CHECK(window_count(1250, 125.0) == 2);
  CHECK(window_count(999, 125.0) == 0);
  CHECK(window_count(15000, 125.0) == 57);
}
