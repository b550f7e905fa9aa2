#include "hrtrack/signal_io.hpp"

#include "hrtrack/errors.hpp"
#include "hrtrack/preprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>

namespace hrtrack {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kBpmLo = 30.0;
constexpr double kBpmHi = 250.0;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_double(std::string_view cell) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc{} || result.ptr != last || cell.empty()) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string> read_lines(const std::string& path, const char* who) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw DataError(std::string(who) + ": cannot open " + path);
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      lines.push_back(line);
    }
  }
  return lines;
}

// Piecewise-linear interpolation of the per-second trajectory.
double hr_at(const std::vector<double>& traj, double t_s) {
  if (traj.size() == 1) return traj.front();
  const double last = static_cast<double>(traj.size() - 1);
  const double t = std::clamp(t_s, 0.0, last);
  const auto i = static_cast<std::size_t>(t);
  if (i + 1 >= traj.size()) return traj.back();
  const double frac = t - static_cast<double>(i);
  return traj[i] + frac * (traj[i + 1] - traj[i]);
}

}  // namespace

Recording load_recording(const std::string& path, const CsvLayout& layout,
                         double sample_rate_hz) {
  if (sample_rate_hz <= 0.0) {
    throw DataError("signal_io: sample rate must be positive");
  }
  const std::vector<std::string> lines = read_lines(path, "signal_io");
  if (lines.empty()) {
    throw DataError("signal_io: empty recording file " + path);
  }

  int col1 = layout.ppg1_col;
  int col2 = layout.ppg2_col;
  std::size_t first_data = 0;

  // Header detection: the first row is a header when any cell is non-numeric.
  const auto head = split_csv(lines[0]);
  const bool has_header =
      std::any_of(head.begin(), head.end(),
                  [](std::string_view c) { return !parse_double(c).has_value(); });
  if (has_header) {
    first_data = 1;
    for (int i = 0; i < static_cast<int>(head.size()); ++i) {
      if (head[i] == layout.ppg1_name) col1 = i;
      if (head[i] == layout.ppg2_name) col2 = i;
    }
  }
  if (first_data >= lines.size()) {
    throw DataError("signal_io: no data rows in " + path);
  }

  const std::size_t width = split_csv(lines[first_data]).size();
  if (col1 == col2 || col1 < 0 || col2 < 0 || col1 >= static_cast<int>(width) ||
      col2 >= static_cast<int>(width)) {
    throw DataError("signal_io: fewer than 2 mapped PPG channels in " + path);
  }

  const std::size_t n = lines.size() - first_data;
  Recording rec;
  rec.sample_rate_hz = sample_rate_hz;
  rec.id = std::filesystem::path(path).stem().string();
  rec.ppg1.resize(static_cast<Eigen::Index>(n));
  rec.ppg2.resize(static_cast<Eigen::Index>(n));

  for (std::size_t r = 0; r < n; ++r) {
    const auto cells = split_csv(lines[first_data + r]);
    if (cells.size() != width) {
      throw DataError("signal_io: ragged row " + std::to_string(first_data + r + 1) +
                      " in " + path);
    }
    const auto v1 = parse_double(cells[static_cast<std::size_t>(col1)]);
    const auto v2 = parse_double(cells[static_cast<std::size_t>(col2)]);
    if (!v1 || !v2) {
      throw DataError("signal_io: non-numeric cell in row " +
                      std::to_string(first_data + r + 1) + " of " + path);
    }
    rec.ppg1[static_cast<Eigen::Index>(r)] = *v1;
    rec.ppg2[static_cast<Eigen::Index>(r)] = *v2;
  }
  return rec;
}

GroundTruth load_ground_truth(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path, "signal_io");
  GroundTruth gt;
  gt.bpm_per_window.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    if (cells.size() != 1) {
      throw DataError("signal_io: expected one BPM per line, got " +
                      std::to_string(cells.size()) + " cells at line " +
                      std::to_string(i + 1) + " of " + path);
    }
    const auto v = parse_double(cells[0]);
    if (!v) {
      throw DataError("signal_io: non-numeric BPM at line " + std::to_string(i + 1) +
                      " of " + path);
    }
    if (*v <= kBpmLo || *v >= kBpmHi) {
      throw DataError("signal_io: BPM out of (30, 250) at line " + std::to_string(i + 1) +
                      " of " + path);
    }
    gt.bpm_per_window.push_back(*v);
  }
  return gt;
}

void write_recording_csv(const Recording& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("signal_io: cannot write " + path);
  }
  out << "ppg1,ppg2\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < rec.ppg1.size(); ++i) {
    out << rec.ppg1[i] << ',' << rec.ppg2[i] << '\n';
  }
}

void write_ground_truth(const GroundTruth& gt, const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("signal_io: cannot write " + path);
  }
  out << std::setprecision(17);
  for (double v : gt.bpm_per_window) {
    out << v << '\n';
  }
}

std::pair<Recording, GroundTruth> synthesize_recording(const SynthesisSpec& spec) {
  if (spec.duration_s <= 0.0 || spec.sample_rate_hz <= 0.0) {
    throw DataError("signal_io: synthesis needs positive duration and rate");
  }
  if (spec.hr_trajectory_bpm.empty()) {
    throw DataError("signal_io: synthesis needs an HR trajectory");
  }
  for (double bpm : spec.hr_trajectory_bpm) {
    if (bpm <= kBpmLo || bpm >= kBpmHi) {
      throw DataError("signal_io: synthesis HR trajectory outside (30, 250) BPM");
    }
  }
  if (spec.harmonic_amplitudes.empty()) {
    throw DataError("signal_io: synthesis needs at least one harmonic amplitude");
  }

  const double fs = spec.sample_rate_hz;
  const auto n = static_cast<Eigen::Index>(std::llround(spec.duration_s * fs));

  Recording rec;
  rec.id = spec.id;
  rec.sample_rate_hz = fs;
  rec.ppg1 = Eigen::VectorXd::Zero(n);
  rec.ppg2 = Eigen::VectorXd::Zero(n);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * kPi);
  std::normal_distribution<double> noise_dist(0.0, 1.0);

  // The second sensor sees the same pulse slightly attenuated and delayed.
  const double ch2_gain = 0.85;
  const double ch2_phase_lag = 0.25;

  Eigen::VectorXd inst_bpm(n);
  double phase = phase_dist(rng);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double bpm = hr_at(spec.hr_trajectory_bpm, t);
    inst_bpm[i] = bpm;
    for (std::size_t k = 0; k < spec.harmonic_amplitudes.size(); ++k) {
      const double a = spec.harmonic_amplitudes[k];
      const double kk = static_cast<double>(k + 1);
      rec.ppg1[i] += a * std::cos(kk * phase);
      rec.ppg2[i] += ch2_gain * a * std::cos(kk * (phase - ch2_phase_lag));
    }
    phase += 2.0 * kPi * (bpm / 60.0) / fs;
  }

  for (const ArtifactTone& tone : spec.artifact_tones) {
    const double phi0 = phase_dist(rng);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      if (t < tone.onset_s) continue;
      const double v = tone.amplitude * std::cos(2.0 * kPi * tone.freq_hz * t + phi0);
      if (tone.channel_mask & 1u) rec.ppg1[i] += v;
      if (tone.channel_mask & 2u) rec.ppg2[i] += v;
    }
  }

  if (spec.noise_std > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) rec.ppg1[i] += spec.noise_std * noise_dist(rng);
    for (Eigen::Index i = 0; i < n; ++i) rec.ppg2[i] += spec.noise_std * noise_dist(rng);
  }

  GroundTruth gt;
  const int windows = window_count(n, fs);
  const auto w_len = static_cast<Eigen::Index>(std::llround(8.0 * fs));
  const auto slide = static_cast<Eigen::Index>(std::llround(2.0 * fs));
  gt.bpm_per_window.reserve(static_cast<std::size_t>(std::max(windows, 0)));
  for (int w = 0; w < windows; ++w) {
    const auto start = static_cast<Eigen::Index>(w) * slide;
    gt.bpm_per_window.push_back(inst_bpm.segment(start, w_len).mean());
  }
  return {std::move(rec), gt};
}

}  // namespace hrtrack
