#include "hrtrack/eval.hpp"

#include "hrtrack/errors.hpp"
#include "hrtrack/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace hrtrack {

namespace fs = std::filesystem;

double mae(const std::vector<double>& estimates, const std::vector<double>& truth) {
  if (estimates.empty() || estimates.size() != truth.size()) {
    throw std::invalid_argument("eval: estimate/truth length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    sum += std::abs(estimates[i] - truth[i]);
  }
  return sum / static_cast<double>(estimates.size());
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw DataError("eval: cannot open config " + path);
  }
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::string key;
    if (!(row >> key)) continue;
    double value = 0.0;
    if (!(row >> value)) {
      throw DataError("eval: bad value for '" + key + "' at line " +
                      std::to_string(line_no) + " of " + path);
    }
    TrackerConfig& t = config.tracker;
    TrainConfig& tr = config.train;
    if (key == "confidence_floor") t.confidence_floor = value;
    else if (key == "eligibility_ratio") t.eligibility_ratio = value;
    else if (key == "beta_idx") t.beta_idx = value;
    else if (key == "rho_bpm") t.rho_bpm = value;
    else if (key == "eps_hz") t.eps_hz = value;
    else if (key == "tau_idx") t.tau_idx = static_cast<int>(value);
    else if (key == "delta_idx") t.delta_idx = static_cast<int>(value);
    else if (key == "peak_threshold") t.peak_threshold = value;
    else if (key == "gamma1") t.gammas[0] = value;
    else if (key == "gamma2") t.gammas[1] = value;
    else if (key == "gamma3") t.gammas[2] = value;
    else if (key == "search_lo_hz") t.search_lo_hz = value;
    else if (key == "search_hi_hz") t.search_hi_hz = value;
    else if (key == "n_points") t.n_points = static_cast<int>(value);
    else if (key == "ar_order") t.ar_order = static_cast<int>(value);
    else if (key == "bp_lo_hz") t.bp_lo_hz = value;
    else if (key == "bp_hi_hz") t.bp_hi_hz = value;
    else if (key == "init_windows") t.init_windows = static_cast<int>(value);
    else if (key == "harmonics_k_max") t.harmonics_k_max = static_cast<int>(value);
    else if (key == "epochs") tr.epochs = static_cast<int>(value);
    else if (key == "learning_rate") tr.learning_rate = value;
    else if (key == "batch_size") tr.batch_size = static_cast<int>(value);
    else if (key == "seed") tr.seed = static_cast<std::uint64_t>(value);
    else if (key == "val_fraction") tr.val_fraction = value;
    else if (key == "hidden_dim") tr.hidden_dim = static_cast<int>(value);
    else {
      throw DataError("eval: unknown config key '" + key + "' in " + path);
    }
  }
  return config;
}

void write_run_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("eval: cannot write config " + path);
  }
  const TrackerConfig& t = config.tracker;
  const TrainConfig& tr = config.train;
  out << std::setprecision(17);
  out << "confidence_floor " << t.confidence_floor << '\n'
      << "eligibility_ratio " << t.eligibility_ratio << '\n'
      << "beta_idx " << t.beta_idx << '\n'
      << "rho_bpm " << t.rho_bpm << '\n'
      << "eps_hz " << t.eps_hz << '\n'
      << "tau_idx " << t.tau_idx << '\n'
      << "delta_idx " << t.delta_idx << '\n'
      << "peak_threshold " << t.peak_threshold << '\n'
      << "gamma1 " << t.gammas[0] << '\n'
      << "gamma2 " << t.gammas[1] << '\n'
      << "gamma3 " << t.gammas[2] << '\n'
      << "search_lo_hz " << t.search_lo_hz << '\n'
      << "search_hi_hz " << t.search_hi_hz << '\n'
      << "n_points " << t.n_points << '\n'
      << "ar_order " << t.ar_order << '\n'
      << "bp_lo_hz " << t.bp_lo_hz << '\n'
      << "bp_hi_hz " << t.bp_hi_hz << '\n'
      << "init_windows " << t.init_windows << '\n'
      << "harmonics_k_max " << t.harmonics_k_max << '\n'
      << "epochs " << tr.epochs << '\n'
      << "learning_rate " << tr.learning_rate << '\n'
      << "batch_size " << tr.batch_size << '\n'
      << "seed " << tr.seed << '\n'
      << "val_fraction " << tr.val_fraction << '\n'
      << "hidden_dim " << tr.hidden_dim << '\n';
}

std::vector<std::pair<std::string, std::string>> scan_data_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw DataError("eval: not a data directory: " + dir);
  }
  std::vector<std::string> recordings;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".csv") continue;
    if (name.size() > 10 && name.substr(name.size() - 10) == "_truth.csv") continue;
    recordings.push_back(entry.path().string());
  }
  std::sort(recordings.begin(), recordings.end());
  if (recordings.empty()) {
    throw DataError("eval: no recordings found in " + dir);
  }

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const std::string& rec : recordings) {
    fs::path truth = fs::path(rec);
    truth.replace_filename(fs::path(rec).stem().string() + "_truth.csv");
    if (!fs::exists(truth)) {
      throw DataError("eval: missing ground truth for " + rec);
    }
    pairs.emplace_back(rec, truth.string());
  }
  return pairs;
}

std::vector<LabeledExample> build_dataset(
    const std::vector<std::pair<Recording, GroundTruth>>& data, const TrackerConfig& cfg) {
  std::vector<LabeledExample> examples;
  for (const auto& [rec, gt] : data) {
    const int windows = window_count(rec.ppg1.size(), rec.sample_rate_hz);
    if (windows < 1) {
      throw DataError("eval: recording " + rec.id + " shorter than one window");
    }
    if (static_cast<std::size_t>(windows) != gt.bpm_per_window.size()) {
      throw DataError("eval: " + rec.id + " has " + std::to_string(windows) +
                      " windows but " + std::to_string(gt.bpm_per_window.size()) +
                      " truth values");
    }
    const Eigen::VectorXd filt1 =
        bandpass(rec.ppg1, cfg.bp_lo_hz, cfg.bp_hi_hz, rec.sample_rate_hz);
    const Eigen::VectorXd filt2 =
        bandpass(rec.ppg2, cfg.bp_lo_hz, cfg.bp_hi_hz, rec.sample_rate_hz);
    const std::vector<Frame> frames1 = frame_stream(filt1, rec.sample_rate_hz, 1);
    const std::vector<Frame> frames2 = frame_stream(filt2, rec.sample_rate_hz, 2);

    for (int w = 0; w < windows; ++w) {
      const ArModel m1 = fit_ar(frames1[static_cast<std::size_t>(w)], cfg.ar_order);
      const ArModel m2 = fit_ar(frames2[static_cast<std::size_t>(w)], cfg.ar_order);
      const SpectrumEstimate s1 = ar_psd(m1, cfg.n_points);
      const SpectrumEstimate s2 = ar_psd(m2, cfg.n_points);
      const CandidateSet set = select_candidates(s1, s2, cfg.peak_threshold,
                                                 cfg.search_lo_hz, cfg.search_hi_hz,
                                                 cfg.delta_idx);
      if (set.members.empty()) continue;

      std::vector<double> history;
      for (int k = 1; k <= 3 && w - k >= 0; ++k) {
        history.push_back(gt.bpm_per_window[static_cast<std::size_t>(w - k)]);
      }
      const Frame norm1 = normalize_to_max(frames1[static_cast<std::size_t>(w)]);
      const Frame norm2 = normalize_to_max(frames2[static_cast<std::size_t>(w)]);
      const std::vector<int> labels =
          label_candidates(set, gt.bpm_per_window[static_cast<std::size_t>(w)]);

      for (std::size_t c = 0; c < set.members.size(); ++c) {
        LabeledExample e;
        e.features = extract_features(set.members[c], set, history, norm1, norm2,
                                      cfg.gammas, cfg.tau_idx);
        e.label = labels[c];
        e.window_index = w;
        e.subject = rec.id;
        examples.push_back(std::move(e));
      }
    }
  }
  return examples;
}

TrainedModels train_models(const std::vector<LabeledExample>& examples,
                           const TrainConfig& config, double j_threshold) {
  TrainedModels out;
  out.report = feature_report(examples, j_threshold);
  out.main_model = train(examples, out.report.selected, config, &out.main_report);
  out.init_model = train(examples, init_feature_mask(), config, &out.init_report);
  return out;
}

EvalResult evaluate(const std::vector<std::pair<Recording, GroundTruth>>& data,
                    const MlpModel& main_model, const MlpModel& init_model,
                    const TrackerConfig& cfg) {
  EvalResult result;
  double mae_sum = 0.0;
  double artpw_sum = 0.0;
  int ok_count = 0;
  for (const auto& [rec, gt] : data) {
    EvalRow row;
    row.id = rec.id;
    try {
      const TrackResult tracked = track_recording(rec, main_model, init_model, cfg);
      std::vector<double> bpm;
      bpm.reserve(tracked.estimates.size());
      for (const HrEstimate& e : tracked.estimates) bpm.push_back(e.bpm);
      row.mae_bpm = mae(bpm, gt.bpm_per_window);
      row.artpw_ms = tracked.artpw_ms;
      row.windows = static_cast<int>(tracked.estimates.size());
      row.ok = true;
      mae_sum += row.mae_bpm;
      artpw_sum += row.artpw_ms;
      ++ok_count;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    result.rows.push_back(std::move(row));
  }
  if (ok_count > 0) {
    result.mean_mae = mae_sum / ok_count;
    result.mean_artpw_ms = artpw_sum / ok_count;
  }
  return result;
}

std::string format_eval_table(const EvalResult& result) {
  std::ostringstream out;
  out << std::left << std::setw(20) << "recording" << std::right << std::setw(10)
      << "windows" << std::setw(12) << "MAE(BPM)" << std::setw(12) << "ARTPW(ms)" << '\n';
  out << std::string(54, '-') << '\n';
  out << std::fixed << std::setprecision(2);
  for (const EvalRow& row : result.rows) {
    out << std::left << std::setw(20) << row.id;
    if (row.ok) {
      out << std::right << std::setw(10) << row.windows << std::setw(12) << row.mae_bpm
          << std::setw(12) << row.artpw_ms << '\n';
    } else {
      out << "  error: " << row.error << '\n';
    }
  }
  out << std::string(54, '-') << '\n';
  out << std::left << std::setw(20) << "Mean" << std::right << std::setw(10) << ""
      << std::setw(12) << result.mean_mae << std::setw(12) << result.mean_artpw_ms << '\n';
  return out.str();
}

void write_estimates_csv(const std::string& path, const std::vector<HrEstimate>& estimates) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("eval: cannot write " + path);
  }
  out << "window,bpm,confidence,path\n";
  out << std::setprecision(10);
  for (const HrEstimate& e : estimates) {
    out << e.window_index << ',' << e.bpm << ',' << e.confidence << ','
        << to_string(e.path) << '\n';
  }
}

void write_feature_report_csv(const std::string& path, const FeatureReport& report) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("eval: cannot write " + path);
  }
  out << "feature,J,selected\n";
  out << std::setprecision(10);
  for (int f = 0; f < kFeatureCount; ++f) {
    out << feature_names()[static_cast<std::size_t>(f)] << ',' << report.j_scores[f] << ','
        << (report.selected[static_cast<std::size_t>(f)] ? 1 : 0) << '\n';
  }
}

void write_eval_csv(const std::string& path, const EvalResult& result) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("eval: cannot write " + path);
  }
  out << "recording,windows,mae_bpm,artpw_ms,ok\n";
  out << std::setprecision(10);
  for (const EvalRow& row : result.rows) {
    out << row.id << ',' << row.windows << ',' << row.mae_bpm << ',' << row.artpw_ms << ','
        << (row.ok ? 1 : 0) << '\n';
  }
  out << "mean,," << result.mean_mae << ',' << result.mean_artpw_ms << ",\n";
}

void write_trace(const std::string& path, const std::vector<StepTrace>& traces) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("eval: cannot write " + path);
  }
  out << "window,attempts,nabla,max_score,c_out,hr_est\n";
  out << std::setprecision(10);
  for (const StepTrace& t : traces) {
    out << t.window_index << ',';
    for (std::size_t i = 0; i < t.attempts.size(); ++i) {
      if (i) out << '+';
      out << to_string(t.attempts[i]);
    }
    out << ',' << t.nabla_size << ',' << t.max_score << ',' << t.c_out_index << ','
        << t.hr_est_bpm << '\n';
  }
}

}  // namespace hrtrack
