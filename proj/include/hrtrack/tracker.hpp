#pragma once

#include "hrtrack/candidates.hpp"
#include "hrtrack/mlp.hpp"
#include "hrtrack/preprocess.hpp"
#include "hrtrack/signal_io.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hrtrack {

enum class EstimatePath { direct, enhanced1, enhanced2, fallback, init };

const char* to_string(EstimatePath path);

struct TrackerConfig {
  double confidence_floor = 0.4;   // minimum score for any estimate
  double eligibility_ratio = 0.7;  // relative-to-max score cut
  double beta_idx = 75.0;          // outlier bound, grid indices
  double rho_bpm = 10.0;           // per-window smoothing bound
  double eps_hz = 0.5;             // harmonic band half-width
  int tau_idx = 30;                // time-domain spacing slack
  int delta_idx = 18;              // refine/harmonic dislocation
  double peak_threshold = 0.3;
  std::array<double, 3> gammas{0.3, 0.5, 0.7};
  double search_lo_hz = 0.6;
  double search_hi_hz = 4.0;
  int n_points = 32768;
  int ar_order = 500;
  double bp_lo_hz = 0.8;
  double bp_hi_hz = 13.0;
  int init_windows = 4;
  int harmonics_k_max = 4;
};

// Rolling bookkeeping between windows of one recording.
struct TrackerState {
  std::vector<double> history_bpm;    // most recent first, at most 3
  std::vector<Frame> prev_frames_ch1;  // most recent first, at most 2 (raw frames)
  std::vector<Frame> prev_frames_ch2;
  int window_index = 0;

  bool in_init_phase(const TrackerConfig& cfg) const {
    return window_index < cfg.init_windows;
  }
};

struct HrEstimate {
  double bpm = 0.0;
  double confidence = 0.0;
  EstimatePath path = EstimatePath::direct;
  int window_index = 0;
};

// Per-window diagnostic record: which stages ran and what they produced.
struct StepTrace {
  int window_index = 0;
  std::vector<EstimatePath> attempts;
  int nabla_size = 0;     // candidate count of the first attempt
  double max_score = 0.0;  // best confidence seen across attempts
  int c_out_index = -1;
  double hr_est_bpm = 0.0;
};

// Confidence gate plus proximity selection: none when no score reaches the
// floor; otherwise the eligible candidate closest to the previous HR index
// (ties: higher score, then lower index).
std::optional<std::pair<int, double>> decide(const CandidateSet& set,
                                             const std::vector<double>& scores,
                                             double prev_bpm,
                                             double confidence_floor = 0.4,
                                             double eligibility_ratio = 0.7);

// True when the chosen index stays within beta grid indices of the previous
// HR location.
bool validate(int c_out_index, double prev_bpm, int n_points, double rate_hz,
              double beta_idx = 75.0);

// Converts the chosen index to BPM and clamps it to prev +/- rho.
double smooth(int c_out_index, double prev_bpm, double rho_bpm, int n_points,
              double rate_hz);

// One window of the online framework: score candidates, retry with the two
// enhancement transforms when the gate or the outlier bound fails, fall back
// to the mean of the previous two estimates when everything fails.
std::pair<HrEstimate, TrackerState> step(const TrackerState& state, const Frame& frame1,
                                         const Frame& frame2, const MlpModel& main_model,
                                         const MlpModel& init_model,
                                         const TrackerConfig& cfg,
                                         StepTrace* trace = nullptr);

struct TrackResult {
  std::vector<HrEstimate> estimates;
  double artpw_ms = 0.0;  // mean wall-clock time per step()
};

// Band-pass + framing + step per window over a whole recording.
TrackResult track_recording(const Recording& rec, const MlpModel& main_model,
                            const MlpModel& init_model, const TrackerConfig& cfg,
                            std::vector<StepTrace>* traces = nullptr);

}  // namespace hrtrack
