#include "hrtrack/tracker.hpp"

#include "hrtrack/features.hpp"
#include "hrtrack/spectrum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hrtrack {

namespace {

struct Attempt {
  CandidateSet set;
  std::vector<double> scores;
};

// Spectra -> candidates -> features -> scores for one pair of frames.
Attempt run_attempt(const Frame& frame1, const Frame& frame2,
                    const std::vector<double>& history, const MlpModel& model,
                    const TrackerConfig& cfg) {
  Attempt attempt;
  const ArModel model1 = fit_ar(frame1, cfg.ar_order);
  const ArModel model2 = fit_ar(frame2, cfg.ar_order);
  const SpectrumEstimate spec1 = ar_psd(model1, cfg.n_points);
  const SpectrumEstimate spec2 = ar_psd(model2, cfg.n_points);
  attempt.set = select_candidates(spec1, spec2, cfg.peak_threshold, cfg.search_lo_hz,
                                  cfg.search_hi_hz, cfg.delta_idx);
  if (attempt.set.members.empty()) return attempt;

  // Time-domain features need normalized frames; degenerate frames just lose them.
  Frame norm1 = frame1;
  Frame norm2 = frame2;
  if (frame1.samples.cwiseAbs().maxCoeff() > 0.0) norm1 = normalize_to_max(frame1);
  if (frame2.samples.cwiseAbs().maxCoeff() > 0.0) norm2 = normalize_to_max(frame2);

  attempt.scores.reserve(attempt.set.members.size());
  for (const Candidate& c : attempt.set.members) {
    const FeatureVector fv =
        extract_features(c, attempt.set, history, norm1, norm2, cfg.gammas, cfg.tau_idx);
    attempt.scores.push_back(forward(model, fv).confidence);
  }
  return attempt;
}

double max_score(const Attempt& attempt) {
  double best = 0.0;
  for (double s : attempt.scores) best = std::max(best, s);
  return best;
}

void push_history(TrackerState& state, double bpm) {
  state.history_bpm.insert(state.history_bpm.begin(), bpm);
  if (state.history_bpm.size() > 3) state.history_bpm.resize(3);
}

void push_frames(TrackerState& state, const Frame& frame1, const Frame& frame2) {
  state.prev_frames_ch1.insert(state.prev_frames_ch1.begin(), frame1);
  if (state.prev_frames_ch1.size() > 2) state.prev_frames_ch1.resize(2);
  state.prev_frames_ch2.insert(state.prev_frames_ch2.begin(), frame2);
  if (state.prev_frames_ch2.size() > 2) state.prev_frames_ch2.resize(2);
}

}  // namespace

const char* to_string(EstimatePath path) {
  switch (path) {
    case EstimatePath::direct: return "direct";
    case EstimatePath::enhanced1: return "enhanced1";
    case EstimatePath::enhanced2: return "enhanced2";
    case EstimatePath::fallback: return "fallback";
    case EstimatePath::init: return "init";
  }
  return "unknown";
}

std::optional<std::pair<int, double>> decide(const CandidateSet& set,
                                             const std::vector<double>& scores,
                                             double prev_bpm, double confidence_floor,
                                             double eligibility_ratio) {
  if (scores.size() != set.members.size()) {
    throw std::invalid_argument("tracker: scores misaligned with candidates");
  }
  if (set.members.empty()) return std::nullopt;

  double best = 0.0;
  for (double s : scores) best = std::max(best, s);
  if (best < confidence_floor) return std::nullopt;

  const double prev_index =
      prev_bpm * static_cast<double>(set.n_points) / (60.0 * set.rate_hz);
  const double cut = eligibility_ratio * best;
  int chosen = -1;
  double chosen_dist = 0.0;
  double chosen_score = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < cut) continue;
    const int index = set.members[i].index;
    const double dist = std::abs(index - prev_index);
    const bool better =
        chosen < 0 || dist < chosen_dist ||
        (dist == chosen_dist && (scores[i] > chosen_score ||
                                 (scores[i] == chosen_score && index < chosen)));
    if (better) {
      chosen = index;
      chosen_dist = dist;
      chosen_score = scores[i];
    }
  }
  return std::make_pair(chosen, chosen_score);
}

bool validate(int c_out_index, double prev_bpm, int n_points, double rate_hz,
              double beta_idx) {
  const double prev_index = prev_bpm * static_cast<double>(n_points) / (60.0 * rate_hz);
  return std::abs(c_out_index - prev_index) <= beta_idx;
}

double smooth(int c_out_index, double prev_bpm, double rho_bpm, int n_points,
              double rate_hz) {
  if (rho_bpm <= 0.0) {
    throw std::invalid_argument("tracker: smoothing bound must be positive");
  }
  const double bpm =
      static_cast<double>(c_out_index) * rate_hz * 60.0 / static_cast<double>(n_points);
  return std::max(std::min(bpm, prev_bpm + rho_bpm), prev_bpm - rho_bpm);
}

std::pair<HrEstimate, TrackerState> step(const TrackerState& state, const Frame& frame1,
                                         const Frame& frame2, const MlpModel& main_model,
                                         const MlpModel& init_model,
                                         const TrackerConfig& cfg, StepTrace* trace) {
  TrackerState next = state;
  HrEstimate estimate;
  estimate.window_index = state.window_index;
  if (trace) {
    *trace = StepTrace{};
    trace->window_index = state.window_index;
  }

  const auto finish = [&](double bpm, double confidence, EstimatePath path,
                          int c_out) -> std::pair<HrEstimate, TrackerState> {
    estimate.bpm = bpm;
    estimate.confidence = confidence;
    estimate.path = path;
    push_history(next, bpm);
    push_frames(next, frame1, frame2);
    next.window_index = state.window_index + 1;
    if (trace) {
      trace->c_out_index = c_out;
      trace->hr_est_bpm = bpm;
    }
    return {estimate, next};
  };

  const auto fall_back = [&]() -> std::pair<HrEstimate, TrackerState> {
    if (trace) trace->attempts.push_back(EstimatePath::fallback);
    double bpm = 90.0;  // band midpoint when there is no history at all
    if (state.history_bpm.size() >= 2) {
      bpm = 0.5 * (state.history_bpm[0] + state.history_bpm[1]);
    } else if (state.history_bpm.size() == 1) {
      bpm = state.history_bpm[0];
    }
    if (!state.history_bpm.empty()) {
      bpm = std::max(std::min(bpm, state.history_bpm[0] + cfg.rho_bpm),
                     state.history_bpm[0] - cfg.rho_bpm);
    }
    return finish(bpm, 0.0, EstimatePath::fallback, -1);
  };

  // Warm-up: score the history-free feature subset and take the best candidate.
  if (state.in_init_phase(cfg)) {
    if (trace) trace->attempts.push_back(EstimatePath::init);
    Attempt attempt;
    try {
      attempt = run_attempt(frame1, frame2, state.history_bpm, init_model, cfg);
    } catch (const std::exception&) {
      return fall_back();
    }
    if (trace) trace->nabla_size = static_cast<int>(attempt.set.members.size());
    if (attempt.set.members.empty()) return fall_back();
    std::size_t best = 0;
    for (std::size_t i = 1; i < attempt.scores.size(); ++i) {
      if (attempt.scores[i] > attempt.scores[best]) best = i;
    }
    if (trace) trace->max_score = attempt.scores[best];
    const int c_out = attempt.set.members[best].index;
    const double bpm =
        index_to_bpm(static_cast<double>(c_out), cfg.n_points, frame1.rate_hz);
    return finish(bpm, attempt.scores[best], EstimatePath::init, c_out);
  }

  const double prev_bpm = state.history_bpm.front();
  const double f_prev_hz = prev_bpm / 60.0;
  const bool have_prev_frames =
      state.prev_frames_ch1.size() >= 2 && state.prev_frames_ch2.size() >= 2;

  for (const EstimatePath stage :
       {EstimatePath::direct, EstimatePath::enhanced1, EstimatePath::enhanced2}) {
    Frame f1 = frame1;
    Frame f2 = frame2;
    try {
      if (stage == EstimatePath::enhanced1) {
        f1 = harmonic_bandpass(frame1, f_prev_hz, cfg.eps_hz, cfg.harmonics_k_max);
        f2 = harmonic_bandpass(frame2, f_prev_hz, cfg.eps_hz, cfg.harmonics_k_max);
      } else if (stage == EstimatePath::enhanced2) {
        if (!have_prev_frames) continue;
        f1 = sum_previous_frames(frame1, state.prev_frames_ch1[0], state.prev_frames_ch1[1]);
        f2 = sum_previous_frames(frame2, state.prev_frames_ch2[0], state.prev_frames_ch2[1]);
      }
      if (trace) trace->attempts.push_back(stage);
      const Attempt attempt = run_attempt(f1, f2, state.history_bpm, main_model, cfg);
      if (trace) {
        if (stage == EstimatePath::direct) {
          trace->nabla_size = static_cast<int>(attempt.set.members.size());
        }
        trace->max_score = std::max(trace->max_score, max_score(attempt));
      }
      const auto decision = decide(attempt.set, attempt.scores, prev_bpm,
                                   cfg.confidence_floor, cfg.eligibility_ratio);
      if (!decision) continue;
      const auto [c_out, confidence] = *decision;
      if (!validate(c_out, prev_bpm, cfg.n_points, frame1.rate_hz, cfg.beta_idx)) {
        continue;
      }
      const double bpm = smooth(c_out, prev_bpm, cfg.rho_bpm, cfg.n_points, frame1.rate_hz);
      return finish(bpm, confidence, stage, c_out);
    } catch (const std::exception&) {
      if (stage == EstimatePath::direct) throw;  // broken input, not an estimation miss
      continue;
    }
  }
  return fall_back();
}

TrackResult track_recording(const Recording& rec, const MlpModel& main_model,
                            const MlpModel& init_model, const TrackerConfig& cfg,
                            std::vector<StepTrace>* traces) {
  if (rec.ppg1.size() != rec.ppg2.size() || rec.ppg1.size() == 0) {
    throw std::invalid_argument("tracker: recording channels must be equal and nonempty");
  }
  if (window_count(rec.ppg1.size(), rec.sample_rate_hz) < 1) {
    throw std::invalid_argument("tracker: recording shorter than one window");
  }

  const Eigen::VectorXd filt1 =
      bandpass(rec.ppg1, cfg.bp_lo_hz, cfg.bp_hi_hz, rec.sample_rate_hz);
  const Eigen::VectorXd filt2 =
      bandpass(rec.ppg2, cfg.bp_lo_hz, cfg.bp_hi_hz, rec.sample_rate_hz);
  const std::vector<Frame> frames1 = frame_stream(filt1, rec.sample_rate_hz, 1);
  const std::vector<Frame> frames2 = frame_stream(filt2, rec.sample_rate_hz, 2);

  TrackResult result;
  result.estimates.reserve(frames1.size());
  TrackerState state;
  double total_ms = 0.0;
  for (std::size_t w = 0; w < frames1.size(); ++w) {
    StepTrace trace;
    const auto start = std::chrono::steady_clock::now();
    auto [estimate, next] =
        step(state, frames1[w], frames2[w], main_model, init_model, cfg,
             traces ? &trace : nullptr);
    const auto stop = std::chrono::steady_clock::now();
    total_ms += std::chrono::duration<double, std::milli>(stop - start).count();
    result.estimates.push_back(estimate);
    if (traces) traces->push_back(std::move(trace));
    state = std::move(next);
  }
  result.artpw_ms = total_ms / static_cast<double>(frames1.size());
  return result;
}

}  // namespace hrtrack
