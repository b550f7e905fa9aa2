#include "hrtrack/errors.hpp"
#include "hrtrack/eval.hpp"
#include "hrtrack/mlp.hpp"
#include "hrtrack/signal_io.hpp"
#include "hrtrack/tracker.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::vector<std::pair<hrtrack::Recording, hrtrack::GroundTruth>> load_data_dir(
    const std::string& dir) {
  std::vector<std::pair<hrtrack::Recording, hrtrack::GroundTruth>> data;
  for (const auto& [rec_path, truth_path] : hrtrack::scan_data_dir(dir)) {
    data.emplace_back(hrtrack::load_recording(rec_path),
                      hrtrack::load_ground_truth(truth_path));
  }
  return data;
}

int run(int argc, char** argv) {
  CLI::App app{"Wrist PPG heart-rate tracker"};
  app.require_subcommand(1);

  std::string data_dir;
  std::string config_path;
  std::string model_path = "main.model";
  std::string init_model_path = "init.model";
  std::string out_path;
  std::string trace_path;
  std::string report_path;
  std::string dump_path;
  std::uint64_t seed = 0;
  bool have_seed = false;

  auto* train_cmd = app.add_subcommand("train", "Train scoring models from labeled data");
  train_cmd->add_option("--data", data_dir, "Directory of recordings + *_truth.csv")
      ->required();
  train_cmd->add_option("--config", config_path, "Key-value config file");
  train_cmd->add_option("--model", model_path, "Output path for the main model");
  train_cmd->add_option("--init-model", init_model_path, "Output path for the warm-up model");
  train_cmd->add_option("--report", report_path, "Feature score report CSV");
  train_cmd->add_option("--dump-examples", dump_path, "Labeled feature dump CSV");
  train_cmd->add_option("--seed", seed, "Training seed")->each([&](const std::string&) {
    have_seed = true;
  });

  auto* track_cmd = app.add_subcommand("track", "Track one recording");
  track_cmd->add_option("--data", data_dir, "Recording CSV path")->required();
  track_cmd->add_option("--model", model_path, "Main model path");
  track_cmd->add_option("--init-model", init_model_path, "Warm-up model path");
  track_cmd->add_option("--config", config_path, "Key-value config file");
  track_cmd->add_option("--out", out_path, "Estimates CSV (default stdout)");
  track_cmd->add_option("--trace", trace_path, "Per-window trace CSV");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate MAE/ARTPW over a data directory");
  eval_cmd->add_option("--data", data_dir, "Directory of recordings + *_truth.csv")
      ->required();
  eval_cmd->add_option("--model", model_path, "Main model path");
  eval_cmd->add_option("--init-model", init_model_path, "Warm-up model path");
  eval_cmd->add_option("--config", config_path, "Key-value config file");
  eval_cmd->add_option("--out", out_path, "Also write the table as CSV");

  auto* features_cmd = app.add_subcommand("features", "Score all features by J");
  features_cmd->add_option("--data", data_dir, "Directory of recordings + *_truth.csv")
      ->required();
  features_cmd->add_option("--config", config_path, "Key-value config file");
  features_cmd->add_option("--out", out_path, "Report CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  hrtrack::RunConfig config;
  if (!config_path.empty()) {
    config = hrtrack::load_run_config(config_path);
  }
  if (have_seed) {
    config.train.seed = seed;
  }

  if (train_cmd->parsed()) {
    const auto data = load_data_dir(data_dir);
    const auto examples = hrtrack::build_dataset(data, config.tracker);
    if (!dump_path.empty()) {
      hrtrack::write_labeled_examples_csv(dump_path, examples);
    }
    const auto trained = hrtrack::train_models(examples, config.train);
    hrtrack::save_model(trained.main_model, model_path);
    hrtrack::save_model(trained.init_model, init_model_path);
    if (!report_path.empty()) {
      hrtrack::write_feature_report_csv(report_path, trained.report);
    }
    std::cout << "examples: " << examples.size() << "\n";
    std::cout << "selected features: " << trained.main_model.input_dim() << "\n";
    std::cout << "validation accuracy (main): " << trained.main_report.val_accuracy << "\n";
    std::cout << "validation accuracy (init): " << trained.init_report.val_accuracy << "\n";
    std::cout << "models written: " << model_path << ", " << init_model_path << "\n";
    return kExitOk;
  }

  if (track_cmd->parsed()) {
    const auto rec = hrtrack::load_recording(data_dir);
    const auto main_model = hrtrack::load_model(model_path);
    const auto init_model = hrtrack::load_model(init_model_path);
    std::vector<hrtrack::StepTrace> traces;
    const auto result = hrtrack::track_recording(
        rec, main_model, init_model, config.tracker,
        trace_path.empty() ? nullptr : &traces);
    if (!trace_path.empty()) {
      hrtrack::write_trace(trace_path, traces);
    }
    if (out_path.empty()) {
      std::cout << "window,bpm,confidence,path\n";
      for (const auto& e : result.estimates) {
        std::cout << e.window_index << ',' << e.bpm << ',' << e.confidence << ','
                  << hrtrack::to_string(e.path) << '\n';
      }
    } else {
      hrtrack::write_estimates_csv(out_path, result.estimates);
    }
    std::cerr << "ARTPW: " << result.artpw_ms << " ms\n";
    return kExitOk;
  }

  if (eval_cmd->parsed()) {
    const auto data = load_data_dir(data_dir);
    const auto main_model = hrtrack::load_model(model_path);
    const auto init_model = hrtrack::load_model(init_model_path);
    const auto result = hrtrack::evaluate(data, main_model, init_model, config.tracker);
    std::cout << hrtrack::format_eval_table(result);
    if (!out_path.empty()) {
      hrtrack::write_eval_csv(out_path, result);
    }
    return kExitOk;
  }

  if (features_cmd->parsed()) {
    const auto data = load_data_dir(data_dir);
    const auto examples = hrtrack::build_dataset(data, config.tracker);
    const auto report = hrtrack::feature_report(examples);
    if (out_path.empty()) {
      std::cout << "feature,J,selected\n";
      for (int f = 0; f < hrtrack::kFeatureCount; ++f) {
        std::cout << hrtrack::feature_names()[static_cast<std::size_t>(f)] << ','
                  << report.j_scores[f] << ','
                  << (report.selected[static_cast<std::size_t>(f)] ? 1 : 0) << '\n';
      }
    } else {
      hrtrack::write_feature_report_csv(out_path, report);
    }
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hrtrack::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
