#pragma once

#include "hrtrack/spectrum.hpp"

#include <array>
#include <utility>
#include <vector>

namespace hrtrack {

struct HarmonicSample {
  int index = 0;
  double magnitude = 0.0;
};

// One spectral candidate with its cross-channel measurements. `index` is the
// peak location in the origin channel; refined locations are the per-channel
// argmax within +/- delta of it.
struct Candidate {
  int origin_channel = 1;
  int index = 0;
  int refined_index_ch1 = 0;
  int refined_index_ch2 = 0;
  double magnitude_ch1 = 0.0;  // at refined_index_ch1
  double magnitude_ch2 = 0.0;  // at refined_index_ch2
  double width = 0.0;          // origin-channel peak shape
  double prominence = 0.0;
  std::array<std::array<HarmonicSample, 3>, 2> harmonics{};  // [channel-1][k-1]
};

// The per-window candidate set: channel-1 peaks first, then channel-2 peaks,
// each kept separately (no cross-channel merging).
struct CandidateSet {
  std::vector<Candidate> members;
  std::vector<SpectralPeak> cp1;
  std::vector<SpectralPeak> cp2;
  int n_points = 32768;
  double rate_hz = 125.0;
};

// Peaks of either channel with normalized magnitude above `threshold` inside
// the search band, fully measured against both spectra.
CandidateSet select_candidates(const SpectrumEstimate& spec1, const SpectrumEstimate& spec2,
                               double threshold = 0.3, double search_lo_hz = 0.6,
                               double search_hi_hz = 4.0, int delta = 18);

// Argmax of magnitude over [(k+1)*(cp-delta), (k+1)*(cp+delta)], clipped to
// [0, n/2]. Returns (0, 0) when the window lies entirely out of range.
std::pair<int, double> locate_harmonic(const SpectrumEstimate& spec, int cp_index, int k,
                                       int delta = 18);

// Argmax of magnitude over [cp-delta, cp+delta], clipped to [0, n/2].
std::pair<int, double> refine_location(const SpectrumEstimate& spec, int cp_index,
                                       int delta = 18);

// Number of other-channel peaks with strict index distance < radius.
int near_count(const Candidate& candidate,
               const std::vector<SpectralPeak>& other_channel_peaks, int radius = 24);

}  // namespace hrtrack
