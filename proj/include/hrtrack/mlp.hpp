#pragma once

#include "hrtrack/features.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace hrtrack {

// Three-layer perceptron: tanh(net - theta) hidden units, linear net - theta
// output. Inputs are the masked feature slots, shifted/scaled by the
// normalization fitted at training time.
struct MlpModel {
  FeatureMask feature_mask{};
  Eigen::MatrixXd hidden_w;      // hidden_dim x input_dim
  Eigen::VectorXd hidden_theta;  // hidden_dim
  Eigen::VectorXd out_w;         // hidden_dim
  double out_theta = 0.0;
  Eigen::VectorXd norm_shift;  // input_dim
  Eigen::VectorXd norm_scale;  // input_dim, all > 0

  int input_dim() const { return static_cast<int>(hidden_w.cols()); }
  int hidden_dim() const { return static_cast<int>(hidden_w.rows()); }
};

struct MlpScore {
  double raw = 0.0;
  double confidence = 0.0;  // raw clamped to [0, 1]
};

struct MlpGradients {
  Eigen::MatrixXd hidden_w;
  Eigen::VectorXd hidden_theta;
  Eigen::VectorXd out_w;
  double out_theta = 0.0;
};

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.05;
  int batch_size = 32;
  std::uint64_t seed = 1;
  double val_fraction = 0.2;
  int hidden_dim = 22;
};

struct TrainReport {
  std::vector<double> epoch_mse;
  int train_count = 0;
  int val_count = 0;
  double val_accuracy = 0.0;  // at the 0.4 confidence gate
  int val_tp = 0, val_fp = 0, val_tn = 0, val_fn = 0;
};

// Applies mask and normalization, producing the network input.
Eigen::VectorXd masked_input(const MlpModel& model, const FeatureVector& features);

MlpScore forward(const MlpModel& model, const FeatureVector& features);

// Analytic gradient of the mean squared error of raw scores over the batch.
MlpGradients gradient(const MlpModel& model, const std::vector<LabeledExample>& batch);

// Mini-batch gradient descent on MSE; minority class resampled 1:1 each
// epoch. Deterministic for a fixed seed and input order.
MlpModel train(const std::vector<LabeledExample>& examples, const FeatureMask& mask,
               const TrainConfig& config, TrainReport* report = nullptr);

// Versioned plain-text serialization; load(save(m)) reproduces m exactly.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace hrtrack
