#include "hrtrack/features.hpp"

#include "hrtrack/errors.hpp"
#include "hrtrack/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

namespace hrtrack {

namespace {

// Strict local maxima above `gamma`, thinned so survivors are at least
// `min_distance` apart (taller peaks win).
int count_time_peaks(const Eigen::VectorXd& x, double gamma, int min_distance) {
  const Eigen::Index n = x.size();
  std::vector<int> maxima;
  Eigen::Index i = 1;
  while (i + 1 < n) {
    if (x[i] > x[i - 1]) {
      Eigen::Index j = i;
      while (j + 1 < n && x[j + 1] == x[i]) ++j;
      if (j + 1 < n && x[j + 1] < x[i]) {
        if (x[i] > gamma) maxima.push_back(static_cast<int>(i));
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  if (min_distance <= 1 || maxima.size() < 2) return static_cast<int>(maxima.size());

  std::vector<int> order(maxima.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return x[maxima[static_cast<std::size_t>(a)]] > x[maxima[static_cast<std::size_t>(b)]];
  });
  std::vector<int> kept;
  for (int oi : order) {
    const int idx = maxima[static_cast<std::size_t>(oi)];
    const bool clear = std::none_of(kept.begin(), kept.end(), [&](int k) {
      return std::abs(k - idx) < min_distance;
    });
    if (clear) kept.push_back(idx);
  }
  return static_cast<int>(kept.size());
}

double class_mean(const std::vector<double>& values, const std::vector<int>& labels,
                  int cls, int* count_out) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (labels[i] == cls) {
      sum += values[i];
      ++count;
    }
  }
  *count_out = count;
  return count > 0 ? sum / count : 0.0;
}

double class_population_variance(const std::vector<double>& values,
                                 const std::vector<int>& labels, int cls, double mean) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (labels[i] == cls) {
      const double d = values[i] - mean;
      sum += d * d;
      ++count;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

}  // namespace

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "M1",   "M2",   "L1",   "L2",   "W",    "P",    "S1_1", "S1_2", "S1_3", "S2_1",
      "S2_2", "S2_3", "D1_1", "D1_2", "D1_3", "D2_1", "D2_2", "D2_3", "N",    "nabla",
      "F_1",  "F_2",  "F_3",  "U",    "T1_1", "T1_2", "T1_3", "T2_1", "T2_2", "T2_3"};
  return names;
}

bool is_history_feature(int index) {
  return index == kFPrev1 || index == kFPrev2 || index == kFPrev3;
}

FeatureMask init_feature_mask() {
  FeatureMask mask{};
  for (int i : {kM1, kM2, kL1, kP, kD11, kD21, kNearCount, kNablaSize, kUniqueness}) {
    mask[static_cast<std::size_t>(i)] = true;
  }
  return mask;
}

FeatureVector extract_features(const Candidate& candidate, const CandidateSet& set,
                               const std::vector<double>& history_bpm,
                               const Frame& frame1_norm, const Frame& frame2_norm,
                               const std::array<double, 3>& gammas, int tau_idx) {
  FeatureVector fv = FeatureVector::Zero();
  const double n = static_cast<double>(set.n_points);
  const double fs = set.rate_hz;

  fv[kM1] = candidate.magnitude_ch1;
  fv[kM2] = candidate.magnitude_ch2;
  fv[kL1] = std::abs(candidate.refined_index_ch1 - candidate.index);
  fv[kL2] = std::abs(candidate.refined_index_ch2 - candidate.index);
  fv[kW] = candidate.width;
  fv[kP] = candidate.prominence;

  for (int ch = 0; ch < 2; ++ch) {
    for (int k = 1; k <= 3; ++k) {
      const HarmonicSample& h =
          candidate.harmonics[static_cast<std::size_t>(ch)][static_cast<std::size_t>(k - 1)];
      fv[kS11 + 3 * ch + (k - 1)] = h.magnitude;
      fv[kD11 + 3 * ch + (k - 1)] =
          std::abs(static_cast<double>(h.index) / (k + 1) - candidate.index);
    }
  }

  const std::vector<SpectralPeak>& own_peaks =
      candidate.origin_channel == 1 ? set.cp1 : set.cp2;
  const std::vector<SpectralPeak>& other_peaks =
      candidate.origin_channel == 1 ? set.cp2 : set.cp1;
  fv[kNearCount] = near_count(candidate, other_peaks);
  fv[kNablaSize] = static_cast<double>(set.members.size());

  for (int k = 1; k <= 3; ++k) {
    if (static_cast<std::size_t>(k) <= history_bpm.size()) {
      const double prev_index = history_bpm[static_cast<std::size_t>(k - 1)] * n / (60.0 * fs);
      fv[kFPrev1 + (k - 1)] = std::abs(candidate.index - prev_index);
    }
  }

  const double own_mag =
      candidate.origin_channel == 1 ? candidate.magnitude_ch1 : candidate.magnitude_ch2;
  double runner_up = 0.0;
  for (const SpectralPeak& p : own_peaks) {
    if (p.index == candidate.index) continue;
    if (p.magnitude < own_mag && p.magnitude > runner_up) runner_up = p.magnitude;
  }
  fv[kUniqueness] = own_mag - runner_up;

  if (!history_bpm.empty()) {
    const Frame* frames[2] = {&frame1_norm, &frame2_norm};
    for (int ch = 0; ch < 2; ++ch) {
      for (int g = 0; g < 3; ++g) {
        const double hr_g = time_domain_hr(*frames[static_cast<std::size_t>(ch)],
                                           gammas[static_cast<std::size_t>(g)],
                                           history_bpm[0], tau_idx, set.n_points);
        const double hr_g_index = hr_g * n / (60.0 * fs);
        fv[kT11 + 3 * ch + g] = std::abs(candidate.index - hr_g_index);
      }
    }
  }
  return fv;
}

double time_domain_hr(const Frame& frame_norm, double gamma, double prev_hr_bpm,
                      int tau_idx, int n_points) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("features: gamma must lie in (0, 1)");
  }
  if (prev_hr_bpm <= 0.0) {
    throw std::invalid_argument("features: previous HR must be positive");
  }
  const double fs = frame_norm.rate_hz;
  const double w_t = static_cast<double>(frame_norm.samples.size()) / fs;
  const double tau_bpm = tau_idx * fs * 60.0 / static_cast<double>(n_points);
  const int min_distance =
      std::max(1, static_cast<int>(std::floor(60.0 * fs / (prev_hr_bpm + tau_bpm))));
  const int count = count_time_peaks(frame_norm.samples, gamma, min_distance);
  return static_cast<double>(count) / w_t * 60.0;
}

std::vector<int> label_candidates(const CandidateSet& set, double hr_true_bpm) {
  if (hr_true_bpm <= 0.0) {
    throw std::invalid_argument("features: true HR must be positive");
  }
  const double true_index =
      hr_true_bpm * static_cast<double>(set.n_points) / (60.0 * set.rate_hz);
  std::vector<int> labels;
  labels.reserve(set.members.size());
  for (const Candidate& c : set.members) {
    labels.push_back(std::abs(c.index - true_index) < 16.0 ? 1 : 0);
  }
  return labels;
}

double fisher_score(const std::vector<double>& values, const std::vector<int>& labels) {
  if (values.size() != labels.size() || values.empty()) {
    throw std::invalid_argument("features: values/labels size mismatch");
  }
  int n0 = 0;
  int n1 = 0;
  const double mu0 = class_mean(values, labels, 0, &n0);
  const double mu1 = class_mean(values, labels, 1, &n1);
  if (n0 == 0 || n1 == 0) {
    throw std::invalid_argument("features: J needs both classes present");
  }
  const double var0 = class_population_variance(values, labels, 0, mu0);
  const double var1 = class_population_variance(values, labels, 1, mu1);
  if (var0 + var1 == 0.0) {
    throw std::runtime_error("features: J undefined for zero within-class variance");
  }
  // (mu_t - mu_0) == n1*q and (mu_t - mu_1) == -n0*q with q = (mu1-mu0)/(n0+n1);
  // this factoring makes the balanced-class case exactly zero.
  const double q = (mu1 - mu0) / static_cast<double>(n0 + n1);
  const double a = static_cast<double>(n1) * q;
  const double b = static_cast<double>(n0) * q;
  return (a * a - b * b) / (var0 + var1);
}

FeatureMask select_features(const Eigen::Matrix<double, kFeatureCount, 1>& j_scores,
                            double threshold) {
  FeatureMask mask{};
  bool any = false;
  for (int i = 0; i < kFeatureCount; ++i) {
    if (is_history_feature(i)) continue;
    if (j_scores[i] > threshold) {
      mask[static_cast<std::size_t>(i)] = true;
      any = true;
    }
  }
  if (!any) {
    std::array<int, kFeatureCount> order{};
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return j_scores[a] > j_scores[b]; });
    int taken = 0;
    for (int i : order) {
      if (is_history_feature(i)) continue;
      mask[static_cast<std::size_t>(i)] = true;
      if (++taken == 5) break;
    }
  }
  return mask;
}

FeatureReport feature_report(const std::vector<LabeledExample>& examples,
                             double threshold) {
  if (examples.empty()) {
    throw std::invalid_argument("features: no examples to score");
  }
  FeatureReport report;
  std::vector<int> labels;
  labels.reserve(examples.size());
  for (const LabeledExample& e : examples) labels.push_back(e.label);

  std::vector<double> values(examples.size());
  for (int f = 0; f < kFeatureCount; ++f) {
    for (std::size_t i = 0; i < examples.size(); ++i) {
      values[i] = examples[i].features[f];
    }
    try {
      report.j_scores[f] = fisher_score(values, labels);
    } catch (const std::exception&) {
      report.j_scores[f] = 0.0;  // degenerate feature, never selected
    }
  }
  report.selected = select_features(report.j_scores, threshold);
  return report;
}

void write_labeled_examples_csv(const std::string& path,
                                const std::vector<LabeledExample>& examples) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("features: cannot write " + path);
  }
  for (int f = 0; f < kFeatureCount; ++f) {
    out << feature_names()[static_cast<std::size_t>(f)] << ',';
  }
  out << "label,window,subject\n";
  out << std::setprecision(17);
  for (const LabeledExample& e : examples) {
    for (int f = 0; f < kFeatureCount; ++f) {
      out << e.features[f] << ',';
    }
    out << e.label << ',' << e.window_index << ',' << e.subject << '\n';
  }
}

}  // namespace hrtrack
