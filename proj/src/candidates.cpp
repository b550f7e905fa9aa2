#include "hrtrack/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hrtrack {

namespace {

// Leftmost argmax over magnitudes[lo..hi].
std::pair<int, double> window_argmax(const Eigen::VectorXd& m, int lo, int hi) {
  int best = lo;
  double best_mag = m[lo];
  for (int i = lo + 1; i <= hi; ++i) {
    if (m[i] > best_mag) {
      best = i;
      best_mag = m[i];
    }
  }
  return {best, best_mag};
}

Candidate measure_candidate(const SpectralPeak& peak, int origin_channel,
                            const SpectrumEstimate& spec1, const SpectrumEstimate& spec2,
                            int delta) {
  Candidate c;
  c.origin_channel = origin_channel;
  c.index = peak.index;
  c.width = peak.width;
  c.prominence = peak.prominence;
  std::tie(c.refined_index_ch1, c.magnitude_ch1) = refine_location(spec1, peak.index, delta);
  std::tie(c.refined_index_ch2, c.magnitude_ch2) = refine_location(spec2, peak.index, delta);
  const SpectrumEstimate* specs[2] = {&spec1, &spec2};
  for (int ch = 0; ch < 2; ++ch) {
    for (int k = 1; k <= 3; ++k) {
      const auto [h_index, h_mag] = locate_harmonic(*specs[ch], peak.index, k, delta);
      c.harmonics[static_cast<std::size_t>(ch)][static_cast<std::size_t>(k - 1)] = {h_index,
                                                                                    h_mag};
    }
  }
  return c;
}

}  // namespace

CandidateSet select_candidates(const SpectrumEstimate& spec1, const SpectrumEstimate& spec2,
                               double threshold, double search_lo_hz, double search_hi_hz,
                               int delta) {
  if (spec1.n_points() != spec2.n_points() || spec1.rate_hz != spec2.rate_hz) {
    throw std::invalid_argument("candidates: channel spectra must share grid and rate");
  }

  CandidateSet set;
  set.n_points = spec1.n_points();
  set.rate_hz = spec1.rate_hz;

  for (const SpectralPeak& p : find_peaks(spec1, search_lo_hz, search_hi_hz)) {
    if (p.magnitude > threshold) set.cp1.push_back(p);
  }
  for (const SpectralPeak& p : find_peaks(spec2, search_lo_hz, search_hi_hz)) {
    if (p.magnitude > threshold) set.cp2.push_back(p);
  }

  set.members.reserve(set.cp1.size() + set.cp2.size());
  for (const SpectralPeak& p : set.cp1) {
    set.members.push_back(measure_candidate(p, 1, spec1, spec2, delta));
  }
  for (const SpectralPeak& p : set.cp2) {
    set.members.push_back(measure_candidate(p, 2, spec1, spec2, delta));
  }
  return set;
}

std::pair<int, double> locate_harmonic(const SpectrumEstimate& spec, int cp_index, int k,
                                       int delta) {
  if (k < 1) {
    throw std::invalid_argument("candidates: harmonic order must be >= 1");
  }
  const int half = spec.n_points() / 2;
  int lo = (k + 1) * (cp_index - delta);
  int hi = (k + 1) * (cp_index + delta);
  lo = std::max(lo, 0);
  hi = std::min(hi, half);
  if (lo > hi) return {0, 0.0};
  return window_argmax(spec.magnitudes, lo, hi);
}

std::pair<int, double> refine_location(const SpectrumEstimate& spec, int cp_index,
                                       int delta) {
  const int half = spec.n_points() / 2;
  const int lo = std::max(cp_index - delta, 0);
  const int hi = std::min(cp_index + delta, half);
  if (lo > hi) {
    throw std::invalid_argument("candidates: refine window outside spectrum");
  }
  return window_argmax(spec.magnitudes, lo, hi);
}

int near_count(const Candidate& candidate,
               const std::vector<SpectralPeak>& other_channel_peaks, int radius) {
  int count = 0;
  for (const SpectralPeak& p : other_channel_peaks) {
    if (std::abs(p.index - candidate.index) < radius) ++count;
  }
  return count;
}

}  // namespace hrtrack
