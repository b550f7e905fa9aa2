#pragma once

#include "hrtrack/features.hpp"
#include "hrtrack/mlp.hpp"
#include "hrtrack/signal_io.hpp"
#include "hrtrack/tracker.hpp"

#include <string>
#include <utility>
#include <vector>

namespace hrtrack {

// Mean absolute difference in BPM. Throws on empty or mismatched lengths.
double mae(const std::vector<double>& estimates, const std::vector<double>& truth);

struct RunConfig {
  TrackerConfig tracker;
  TrainConfig train;
};

// Key-value text config ("name value" per line, '#' comments). Unknown keys
// are rejected. Every tracker and training field is exposed.
RunConfig load_run_config(const std::string& path);
void write_run_config(const RunConfig& config, const std::string& path);

// Pairs "<name>.csv" recordings with "<name>_truth.csv" ground truth inside a
// directory. Throws when a recording lacks its truth file.
std::vector<std::pair<std::string, std::string>> scan_data_dir(const std::string& dir);

// Feature extraction over all windows of all recordings, labeled against the
// per-window truth. History features use the true previous-window HR.
std::vector<LabeledExample> build_dataset(
    const std::vector<std::pair<Recording, GroundTruth>>& data, const TrackerConfig& cfg);

struct TrainedModels {
  MlpModel main_model;
  MlpModel init_model;
  FeatureReport report;
  TrainReport main_report;
  TrainReport init_report;
};

// Feature scoring + selection, then the main and warm-up models.
TrainedModels train_models(const std::vector<LabeledExample>& examples,
                           const TrainConfig& config, double j_threshold = 0.3);

struct EvalRow {
  std::string id;
  bool ok = false;
  std::string error;
  double mae_bpm = 0.0;
  double artpw_ms = 0.0;
  int windows = 0;
};

struct EvalResult {
  std::vector<EvalRow> rows;
  double mean_mae = 0.0;
  double mean_artpw_ms = 0.0;
};

// Tracks every recording and reports per-recording MAE/ARTPW plus their means
// over the rows that evaluated cleanly.
EvalResult evaluate(const std::vector<std::pair<Recording, GroundTruth>>& data,
                    const MlpModel& main_model, const MlpModel& init_model,
                    const TrackerConfig& cfg);

std::string format_eval_table(const EvalResult& result);

void write_estimates_csv(const std::string& path, const std::vector<HrEstimate>& estimates);
void write_feature_report_csv(const std::string& path, const FeatureReport& report);
void write_eval_csv(const std::string& path, const EvalResult& result);
void write_trace(const std::string& path, const std::vector<StepTrace>& traces);

}  // namespace hrtrack
