#include "hrtrack/mlp.hpp"

#include "hrtrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hrtrack {

namespace {

int mask_dim(const FeatureMask& mask) {
  int d = 0;
  for (bool b : mask) {
    if (b) ++d;
  }
  return d;
}

Eigen::VectorXd select_slots(const FeatureMask& mask, const FeatureVector& features) {
  Eigen::VectorXd x(mask_dim(mask));
  int j = 0;
  for (int i = 0; i < kFeatureCount; ++i) {
    if (mask[static_cast<std::size_t>(i)]) x[j++] = features[i];
  }
  return x;
}

struct ForwardPass {
  Eigen::VectorXd input;   // normalized
  Eigen::VectorXd hidden;  // tanh activations
  double raw = 0.0;
};

ForwardPass run_forward(const MlpModel& model, const FeatureVector& features) {
  ForwardPass pass;
  const Eigen::VectorXd x = select_slots(model.feature_mask, features);
  if (x.size() != model.input_dim()) {
    throw std::invalid_argument("mlp: feature mask does not match model input size");
  }
  pass.input = (x - model.norm_shift).cwiseQuotient(model.norm_scale);
  pass.hidden = (model.hidden_w * pass.input - model.hidden_theta).array().tanh();
  pass.raw = model.out_w.dot(pass.hidden) - model.out_theta;
  return pass;
}

void check_dims(const MlpModel& model) {
  const int d = model.input_dim();
  const int h = model.hidden_dim();
  if (mask_dim(model.feature_mask) != d || model.hidden_theta.size() != h ||
      model.out_w.size() != h || model.norm_shift.size() != d ||
      model.norm_scale.size() != d) {
    throw std::invalid_argument("mlp: inconsistent model dimensions");
  }
}

}  // namespace

Eigen::VectorXd masked_input(const MlpModel& model, const FeatureVector& features) {
  check_dims(model);
  const Eigen::VectorXd x = select_slots(model.feature_mask, features);
  return (x - model.norm_shift).cwiseQuotient(model.norm_scale);
}

MlpScore forward(const MlpModel& model, const FeatureVector& features) {
  check_dims(model);
  const ForwardPass pass = run_forward(model, features);
  return {pass.raw, std::clamp(pass.raw, 0.0, 1.0)};
}

MlpGradients gradient(const MlpModel& model, const std::vector<LabeledExample>& batch) {
  check_dims(model);
  if (batch.empty()) {
    throw std::invalid_argument("mlp: gradient of an empty batch");
  }
  MlpGradients g;
  g.hidden_w = Eigen::MatrixXd::Zero(model.hidden_dim(), model.input_dim());
  g.hidden_theta = Eigen::VectorXd::Zero(model.hidden_dim());
  g.out_w = Eigen::VectorXd::Zero(model.hidden_dim());
  g.out_theta = 0.0;

  const double scale = 2.0 / static_cast<double>(batch.size());
  for (const LabeledExample& example : batch) {
    const ForwardPass pass = run_forward(model, example.features);
    const double err = pass.raw - static_cast<double>(example.label);
    const Eigen::VectorXd d_hidden = scale * err * model.out_w;
    const Eigen::VectorXd d_pre =
        d_hidden.cwiseProduct(Eigen::VectorXd::Ones(pass.hidden.size()) -
                              pass.hidden.cwiseProduct(pass.hidden));
    g.out_w += scale * err * pass.hidden;
    g.out_theta += -scale * err;
    g.hidden_w += d_pre * pass.input.transpose();
    g.hidden_theta += -d_pre;
  }
  return g;
}

MlpModel train(const std::vector<LabeledExample>& examples, const FeatureMask& mask,
               const TrainConfig& config, TrainReport* report) {
  if (config.epochs < 1 || config.learning_rate <= 0.0 || config.batch_size < 1 ||
      config.hidden_dim < 1) {
    throw std::invalid_argument("mlp: invalid training configuration");
  }
  std::vector<std::size_t> class_idx[2];
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const int label = examples[i].label;
    if (label != 0 && label != 1) {
      throw std::invalid_argument("mlp: labels must be 0 or 1");
    }
    class_idx[label].push_back(i);
  }
  if (class_idx[0].empty() || class_idx[1].empty()) {
    throw std::runtime_error("mlp: training needs both classes");
  }

  std::mt19937_64 rng(config.seed);

  // Stratified train/validation split.
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
  for (auto& idx : class_idx) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_val = static_cast<std::size_t>(
        config.val_fraction * static_cast<double>(idx.size()));
    val_idx.insert(val_idx.end(), idx.begin(), idx.begin() + n_val);
    train_idx.insert(train_idx.end(), idx.begin() + n_val, idx.end());
  }

  MlpModel model;
  model.feature_mask = mask;
  const int d = mask_dim(mask);
  const int h = config.hidden_dim;
  if (d < 1) {
    throw std::invalid_argument("mlp: empty feature mask");
  }

  // Normalization fitted on the training portion.
  model.norm_shift = Eigen::VectorXd::Zero(d);
  model.norm_scale = Eigen::VectorXd::Ones(d);
  Eigen::MatrixXd x_train(static_cast<Eigen::Index>(train_idx.size()), d);
  for (std::size_t r = 0; r < train_idx.size(); ++r) {
    x_train.row(static_cast<Eigen::Index>(r)) =
        select_slots(mask, examples[train_idx[r]].features).transpose();
  }
  model.norm_shift = x_train.colwise().mean();
  for (int c = 0; c < d; ++c) {
    const double var =
        (x_train.col(c).array() - model.norm_shift[c]).square().mean();
    model.norm_scale[c] = std::max(std::sqrt(var), 1e-12);
  }

  std::uniform_real_distribution<double> w_hidden(-1.0 / std::sqrt(d), 1.0 / std::sqrt(d));
  std::uniform_real_distribution<double> w_out(-1.0 / std::sqrt(h), 1.0 / std::sqrt(h));
  model.hidden_w = Eigen::MatrixXd::NullaryExpr(h, d, [&]() { return w_hidden(rng); });
  model.hidden_theta = Eigen::VectorXd::NullaryExpr(h, [&]() { return w_hidden(rng); });
  model.out_w = Eigen::VectorXd::NullaryExpr(h, [&]() { return w_out(rng); });
  model.out_theta = w_out(rng);

  std::vector<std::size_t> train_class[2];
  for (std::size_t i : train_idx) {
    train_class[examples[i].label].push_back(i);
  }
  if (train_class[0].empty() || train_class[1].empty()) {
    throw std::runtime_error("mlp: training split lost a class");
  }
  const int minority = train_class[0].size() < train_class[1].size() ? 0 : 1;
  const std::size_t majority_count = train_class[1 - minority].size();

  if (report) {
    report->epoch_mse.clear();
    report->train_count = static_cast<int>(train_idx.size());
    report->val_count = static_cast<int>(val_idx.size());
  }

  std::vector<std::size_t> epoch_set;
  std::vector<LabeledExample> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    epoch_set = train_class[1 - minority];
    std::uniform_int_distribution<std::size_t> pick(0, train_class[minority].size() - 1);
    for (std::size_t i = 0; i < majority_count; ++i) {
      epoch_set.push_back(train_class[minority][pick(rng)]);
    }
    std::shuffle(epoch_set.begin(), epoch_set.end(), rng);

    double epoch_sq = 0.0;
    for (std::size_t start = 0; start < epoch_set.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(epoch_set.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(examples[epoch_set[i]]);
      }
      const MlpGradients g = gradient(model, batch);
      model.hidden_w -= config.learning_rate * g.hidden_w;
      model.hidden_theta -= config.learning_rate * g.hidden_theta;
      model.out_w -= config.learning_rate * g.out_w;
      model.out_theta -= config.learning_rate * g.out_theta;

      for (const LabeledExample& e : batch) {
        const double err = run_forward(model, e.features).raw - e.label;
        epoch_sq += err * err;
      }
    }
    if (report) {
      report->epoch_mse.push_back(epoch_sq / static_cast<double>(epoch_set.size()));
    }
  }

  if (report && !val_idx.empty()) {
    int correct = 0;
    report->val_tp = report->val_fp = report->val_tn = report->val_fn = 0;
    for (std::size_t i : val_idx) {
      const bool predicted = forward(model, examples[i].features).confidence >= 0.4;
      const bool actual = examples[i].label == 1;
      if (predicted == actual) ++correct;
      if (predicted && actual) ++report->val_tp;
      if (predicted && !actual) ++report->val_fp;
      if (!predicted && !actual) ++report->val_tn;
      if (!predicted && actual) ++report->val_fn;
    }
    report->val_accuracy = static_cast<double>(correct) / static_cast<double>(val_idx.size());
  }
  return model;
}

void save_model(const MlpModel& model, const std::string& path) {
  check_dims(model);
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("mlp: cannot write " + path);
  }
  out << "hrtrack_mlp 1\n";
  out << "input_dim " << model.input_dim() << "\n";
  out << "hidden_dim " << model.hidden_dim() << "\n";
  out << "mask";
  for (bool b : model.feature_mask) out << ' ' << (b ? 1 : 0);
  out << "\n";
  out << std::setprecision(17);
  auto dump = [&out](const char* name, const double* data, Eigen::Index count) {
    out << name;
    for (Eigen::Index i = 0; i < count; ++i) out << ' ' << data[i];
    out << '\n';
  };
  dump("norm_shift", model.norm_shift.data(), model.norm_shift.size());
  dump("norm_scale", model.norm_scale.data(), model.norm_scale.size());
  out << "hidden_w";
  for (int r = 0; r < model.hidden_dim(); ++r) {
    for (int c = 0; c < model.input_dim(); ++c) out << ' ' << model.hidden_w(r, c);
  }
  out << '\n';
  dump("hidden_theta", model.hidden_theta.data(), model.hidden_theta.size());
  dump("out_w", model.out_w.data(), model.out_w.size());
  out << "out_theta " << model.out_theta << '\n';
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw DataError("mlp: cannot open " + path);
  }
  auto expect = [&in, &path](const char* token) {
    std::string word;
    if (!(in >> word) || word != token) {
      throw DataError("mlp: malformed model file " + path + " (expected " + token + ")");
    }
  };
  expect("hrtrack_mlp");
  int version = 0;
  if (!(in >> version) || version != 1) {
    throw DataError("mlp: unsupported model file version in " + path);
  }
  int d = 0;
  int h = 0;
  expect("input_dim");
  in >> d;
  expect("hidden_dim");
  in >> h;
  if (!in || d < 1 || h < 1) {
    throw DataError("mlp: bad dimensions in " + path);
  }

  MlpModel model;
  expect("mask");
  int mask_bits = 0;
  for (int i = 0; i < kFeatureCount; ++i) {
    int bit = 0;
    if (!(in >> bit) || (bit != 0 && bit != 1)) {
      throw DataError("mlp: bad mask in " + path);
    }
    model.feature_mask[static_cast<std::size_t>(i)] = bit == 1;
    mask_bits += bit;
  }
  if (mask_bits != d) {
    throw DataError("mlp: mask does not match input_dim in " + path);
  }

  auto read_block = [&in, &expect, &path](const char* name, double* data, Eigen::Index count) {
    expect(name);
    for (Eigen::Index i = 0; i < count; ++i) {
      if (!(in >> data[i])) {
        throw DataError("mlp: truncated model file " + path);
      }
    }
  };
  model.norm_shift.resize(d);
  model.norm_scale.resize(d);
  model.hidden_w.resize(h, d);
  model.hidden_theta.resize(h);
  model.out_w.resize(h);
  read_block("norm_shift", model.norm_shift.data(), d);
  read_block("norm_scale", model.norm_scale.data(), d);
  expect("hidden_w");
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < d; ++c) {
      if (!(in >> model.hidden_w(r, c))) {
        throw DataError("mlp: truncated model file " + path);
      }
    }
  }
  read_block("hidden_theta", model.hidden_theta.data(), h);
  read_block("out_w", model.out_w.data(), h);
  read_block("out_theta", &model.out_theta, 1);
  return model;
}

}  // namespace hrtrack
