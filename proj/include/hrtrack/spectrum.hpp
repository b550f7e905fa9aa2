#pragma once

#include "hrtrack/preprocess.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hrtrack {

// All-pole model fitted to one frame. coeffs[0] == 1; all reflection
// coefficients satisfy |k| < 1, so the model is stable.
struct ArModel {
  Eigen::VectorXd coeffs;       // order + 1
  Eigen::VectorXd reflections;  // order
  double noise_variance = 0.0;
  double rate_hz = 125.0;
  int channel = 1;
};

// Normalized magnitude spectrum on a uniform n-point grid over [0, rate).
// max(magnitudes) == 1; only indices up to n/2 are meaningful downstream.
struct SpectrumEstimate {
  Eigen::VectorXd magnitudes;
  double rate_hz = 125.0;
  int channel = 1;
  int n_points() const { return static_cast<int>(magnitudes.size()); }
};

struct SpectralPeak {
  int index = 0;
  double magnitude = 0.0;
  double width = 0.0;       // indices, measured at half prominence
  double prominence = 0.0;  // topographic, in normalized magnitude units
};

// Burg recursion. Throws on frames shorter than order+1 and on degenerate
// (constant or all-zero) frames.
ArModel fit_ar(const Frame& frame, int order = 500);

// Evaluates the model's magnitude response on an n_points grid and normalizes
// the maximum to exactly 1.
SpectrumEstimate ar_psd(const ArModel& model, int n_points = 32768);

// Strict local maxima within [lo_hz, hi_hz], each with topographic prominence
// and width at half prominence; sorted by index. Plateaus report their
// leftmost sample.
std::vector<SpectralPeak> find_peaks(const SpectrumEstimate& spec, double search_lo_hz,
                                     double search_hi_hz);

double index_to_bpm(double index, int n_points, double rate_hz);
double bpm_to_index(double bpm, int n_points, double rate_hz);

}  // namespace hrtrack
