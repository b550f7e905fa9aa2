#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hrtrack/errors.hpp"
#include "hrtrack/preprocess.hpp"
#include "hrtrack/signal_io.hpp"

#include "test_util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace hrtrack;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("hrtrack_io_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("load_recording parses a plain two-column csv") {
  TempDir dir;
  std::string body = "ppg1,ppg2\n";
  for (int i = 0; i < 1000; ++i) {
    body += std::to_string(i) + "," + std::to_string(2 * i) + "\n";
  }
  write_file(dir.file("rec.csv"), body);

  const Recording rec = load_recording(dir.file("rec.csv"));
  CHECK(rec.ppg1.size() == 1000);
  CHECK(rec.ppg2.size() == 1000);
  CHECK(rec.ppg1[3] == doctest::Approx(3.0));
  CHECK(rec.ppg2[3] == doctest::Approx(6.0));
  CHECK(rec.id == "rec");
  CHECK(rec.sample_rate_hz == doctest::Approx(125.0));
}

TEST_CASE("load_recording projects mapped columns and ignores the rest") {
  TempDir dir;
  std::string body = "ecg,ppg1,ppg2,ax,ay,az\n";
  for (int i = 0; i < 10; ++i) {
    body += "9,1.5,2.5,0,0,0\n";
  }
  write_file(dir.file("six.csv"), body);

  const Recording rec = load_recording(dir.file("six.csv"));
  CHECK(rec.ppg1[0] == doctest::Approx(1.5));
  CHECK(rec.ppg2[0] == doctest::Approx(2.5));

  CsvLayout by_index;
  by_index.ppg1_name = "nonexistent_a";
  by_index.ppg2_name = "nonexistent_b";
  by_index.ppg1_col = 1;
  by_index.ppg2_col = 2;
  const Recording rec2 = load_recording(dir.file("six.csv"), by_index);
  CHECK(rec2.ppg1[0] == doctest::Approx(1.5));
}

TEST_CASE("load_recording rejects bad input") {
  TempDir dir;
  CHECK_THROWS_AS(load_recording(dir.file("missing.csv")), DataError);

  write_file(dir.file("ragged.csv"), "1,2,3,4,5,6\n1,2,3,4,5\n1,2,3,4,5,6\n");
  CHECK_THROWS_AS(load_recording(dir.file("ragged.csv")), DataError);

  write_file(dir.file("nan.csv"), "1,2\n1,abc\n");
  CHECK_THROWS_AS(load_recording(dir.file("nan.csv")), DataError);

  write_file(dir.file("one.csv"), "1,2\n3,4\n");
  CsvLayout same;
  same.ppg1_name = "x";
  same.ppg2_name = "y";
  same.ppg1_col = 0;
  same.ppg2_col = 0;
  CHECK_THROWS_AS(load_recording(dir.file("one.csv"), same), DataError);
}

TEST_CASE("load_ground_truth parses, validates range") {
  TempDir dir;
  write_file(dir.file("gt.csv"), "72\n75\n78\n");
  const GroundTruth gt = load_ground_truth(dir.file("gt.csv"));
  REQUIRE(gt.bpm_per_window.size() == 3);
  CHECK(gt.bpm_per_window[0] == doctest::Approx(72.0));
  CHECK(gt.bpm_per_window[2] == doctest::Approx(78.0));

  write_file(dir.file("bad.csv"), "72\nabc\n");
  CHECK_THROWS_AS(load_ground_truth(dir.file("bad.csv")), DataError);

  write_file(dir.file("high.csv"), "400\n");
  CHECK_THROWS_AS(load_ground_truth(dir.file("high.csv")), DataError);
}

TEST_CASE("synthesized constant heart rate hits the expected spectrum and truth") {
  SynthesisSpec spec;
  spec.duration_s = 32.0;
  spec.hr_trajectory_bpm.assign(33, 75.0);
  spec.noise_std = 0.0;
  const auto [rec, gt] = synthesize_recording(spec);

  REQUIRE(rec.ppg1.size() == 4000);
  REQUIRE(gt.bpm_per_window.size() == 13);
  for (double bpm : gt.bpm_per_window) {
    CHECK(bpm == doctest::Approx(75.0).epsilon(1e-9));
  }

  // Periodogram of the first window should peak at the 1.25 Hz fundamental.
  const int n_points = 32768;
  const Eigen::VectorXd mag =
      testutil::periodogram_magnitude(rec.ppg1.head(1000), n_points);
  const int lo = static_cast<int>(0.6 * n_points / 125.0);
  const int hi = static_cast<int>(4.0 * n_points / 125.0);
  const int peak = testutil::argmax_range(mag, lo, hi);
  CHECK(std::abs(peak - 1.25 * n_points / 125.0) < 4.0);
}

TEST_CASE("artifact tone dominates the window but leaves the fundamental above 0.3") {
  SynthesisSpec spec;
  spec.duration_s = 16.0;
  spec.hr_trajectory_bpm.assign(17, 75.0);
  spec.artifact_tones.push_back({2.5, 3.0, 3u, 0.0});
  spec.noise_std = 0.0;
  const auto [rec, gt] = synthesize_recording(spec);

  const int n_points = 32768;
  const Eigen::VectorXd mag =
      testutil::periodogram_magnitude(rec.ppg1.head(1000), n_points);
  const int hr_bin = static_cast<int>(std::lround(1.25 * n_points / 125.0));
  const int tone_bin = static_cast<int>(std::lround(2.5 * n_points / 125.0));
  const double hr_mag = mag.segment(hr_bin - 2, 5).maxCoeff();
  const double tone_mag = mag.segment(tone_bin - 2, 5).maxCoeff();
  CHECK(tone_mag > hr_mag);            // artifact dominates
  CHECK(hr_mag / tone_mag > 0.3);      // fundamental keeps its footprint
}

TEST_CASE("synthesis edge cases") {
  SynthesisSpec spec;
  spec.duration_s = 8.0;
  spec.hr_trajectory_bpm.assign(9, 80.0);
  const auto [rec, gt] = synthesize_recording(spec);
  CHECK(gt.bpm_per_window.size() == 1);

  SynthesisSpec bad = spec;
  bad.hr_trajectory_bpm.assign(9, 400.0);
  CHECK_THROWS_AS(synthesize_recording(bad), DataError);
}

TEST_CASE("ground truth length always matches the window formula") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dur(8.0, 40.0);
  for (int trial = 0; trial < 10; ++trial) {
    SynthesisSpec spec;
    spec.duration_s = dur(rng);
    spec.hr_trajectory_bpm.assign(static_cast<std::size_t>(spec.duration_s) + 2, 90.0);
    spec.seed = trial;
    const auto [rec, gt] = synthesize_recording(spec);
    CHECK(static_cast<int>(gt.bpm_per_window.size()) ==
          window_count(rec.ppg1.size(), rec.sample_rate_hz));
  }
}

TEST_CASE("recording csv round trip") {
  SynthesisSpec spec;
  spec.duration_s = 10.0;
  spec.hr_trajectory_bpm.assign(11, 95.0);
  spec.noise_std = 0.2;
  spec.seed = 42;
  const auto [rec, gt] = synthesize_recording(spec);

  TempDir dir;
  write_recording_csv(rec, dir.file("round.csv"));
  const Recording back = load_recording(dir.file("round.csv"));
  REQUIRE(back.ppg1.size() == rec.ppg1.size());
  CHECK((back.ppg1 - rec.ppg1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.ppg2 - rec.ppg2).cwiseAbs().maxCoeff() == 0.0);

  write_ground_truth(gt, dir.file("round_truth.csv"));
  const GroundTruth gt_back = load_ground_truth(dir.file("round_truth.csv"));
  REQUIRE(gt_back.bpm_per_window.size() == gt.bpm_per_window.size());
  for (std::size_t i = 0; i < gt.bpm_per_window.size(); ++i) {
    CHECK(gt_back.bpm_per_window[i] == gt.bpm_per_window[i]);
  }
}
