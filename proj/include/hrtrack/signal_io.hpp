#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hrtrack {

// Two-channel wrist PPG recording at a fixed sample rate.
struct Recording {
  std::string id;
  double sample_rate_hz = 125.0;
  Eigen::VectorXd ppg1;
  Eigen::VectorXd ppg2;
};

// Reference heart rate, one BPM value per 8 s analysis window (2 s slide).
struct GroundTruth {
  std::vector<double> bpm_per_window;
};

// Column selection for CSV ingestion. When the file has a header row and the
// named columns exist, names win; otherwise the 0-based indices are used.
// Any extra columns (ECG, accelerometer axes, ...) are ignored.
struct CsvLayout {
  std::string ppg1_name = "ppg1";
  std::string ppg2_name = "ppg2";
  int ppg1_col = 0;
  int ppg2_col = 1;
};

// One interfering sinusoid mixed into the synthetic pulse signal.
struct ArtifactTone {
  double freq_hz = 0.0;
  double amplitude = 0.0;
  unsigned channel_mask = 3;  // bit 0 -> ppg1, bit 1 -> ppg2
  double onset_s = 0.0;       // silent before this time
};

// Recipe for a synthetic recording with a known per-second HR trajectory.
struct SynthesisSpec {
  double duration_s = 60.0;
  double sample_rate_hz = 125.0;
  std::vector<double> hr_trajectory_bpm;                // one value per second
  std::vector<ArtifactTone> artifact_tones;
  std::vector<double> harmonic_amplitudes = {1.0, 0.5, 0.25};
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::string id = "synthetic";
};

// Loads a two-channel PPG CSV. Throws DataError on missing file, ragged rows,
// non-numeric mapped cells, or when fewer than two distinct channels map.
Recording load_recording(const std::string& path, const CsvLayout& layout = {},
                         double sample_rate_hz = 125.0);

// One BPM per line, each in (30, 250). Throws DataError otherwise.
GroundTruth load_ground_truth(const std::string& path);

void write_recording_csv(const Recording& rec, const std::string& path);
void write_ground_truth(const GroundTruth& gt, const std::string& path);

// Renders the spec into a pulse-plus-artifact recording and its per-window
// mean-BPM ground truth.
std::pair<Recording, GroundTruth> synthesize_recording(const SynthesisSpec& spec);

}  // namespace hrtrack
