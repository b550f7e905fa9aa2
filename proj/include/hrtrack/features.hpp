#pragma once

#include "hrtrack/candidates.hpp"
#include "hrtrack/preprocess.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace hrtrack {

inline constexpr int kFeatureCount = 30;

// Fixed slot order; reports and masks use these indices.
enum FeatureIndex : int {
  kM1 = 0,
  kM2,
  kL1,
  kL2,
  kW,
  kP,
  kS11,
  kS12,
  kS13,
  kS21,
  kS22,
  kS23,
  kD11,
  kD12,
  kD13,
  kD21,
  kD22,
  kD23,
  kNearCount,
  kNablaSize,
  kFPrev1,
  kFPrev2,
  kFPrev3,
  kUniqueness,
  kT11,
  kT12,
  kT13,
  kT21,
  kT22,
  kT23,
};

using FeatureVector = Eigen::Matrix<double, kFeatureCount, 1>;
using FeatureMask = std::array<bool, kFeatureCount>;

const std::array<std::string, kFeatureCount>& feature_names();

// Slots that depend on previous HR estimates (unusable before any history).
bool is_history_feature(int index);

// The reduced, history-free slots used while the tracker warms up.
FeatureMask init_feature_mask();

struct LabeledExample {
  FeatureVector features = FeatureVector::Zero();
  int label = 0;
  int window_index = 0;
  std::string subject;
};

struct FeatureReport {
  Eigen::Matrix<double, kFeatureCount, 1> j_scores =
      Eigen::Matrix<double, kFeatureCount, 1>::Zero();
  FeatureMask selected{};
};

// Fills all 30 slots for one candidate. `history_bpm` holds previous HR
// estimates most-recent first; missing history zeroes the slots that need it.
FeatureVector extract_features(const Candidate& candidate, const CandidateSet& set,
                               const std::vector<double>& history_bpm,
                               const Frame& frame1_norm, const Frame& frame2_norm,
                               const std::array<double, 3>& gammas, int tau_idx = 30);

// Time-domain rate from peaks above `gamma` with a minimum spacing tied to a
// rate slightly above the previous estimate.
double time_domain_hr(const Frame& frame_norm, double gamma, double prev_hr_bpm,
                      int tau_idx = 30, int n_points = 32768);

// 1 when the candidate sits within 16 grid indices of the true HR, else 0.
std::vector<int> label_candidates(const CandidateSet& set, double hr_true_bpm);

// Class-separability score ((mu_t-mu_0)^2 - (mu_t-mu_1)^2) / (var_0 + var_1)
// with population variances. Throws on single-class input or zero variance sum.
double fisher_score(const std::vector<double>& values, const std::vector<int>& labels);

// J > threshold, excluding the previous-HR-distance slots; falls back to the
// top five J values (same exclusion) when nothing clears the threshold.
FeatureMask select_features(const Eigen::Matrix<double, kFeatureCount, 1>& j_scores,
                            double threshold = 0.3);

// Per-feature J over a labeled dataset; degenerate features score 0.
FeatureReport feature_report(const std::vector<LabeledExample>& examples,
                             double threshold = 0.3);

void write_labeled_examples_csv(const std::string& path,
                                const std::vector<LabeledExample>& examples);

}  // namespace hrtrack
