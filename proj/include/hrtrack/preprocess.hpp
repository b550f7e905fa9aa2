#pragma once

#include <Eigen/Dense>

#include <vector>

namespace hrtrack {

// One 8 s analysis window of a single PPG channel.
struct Frame {
  Eigen::VectorXd samples;
  int window_index = 0;
  int channel = 1;
  double rate_hz = 125.0;
};

// floor((n - 8*rate) / (2*rate)) + 1; zero when the signal is shorter than
// one window.
int window_count(Eigen::Index n_samples, double rate_hz);

// Zero-phase Butterworth band-pass (forward-backward IIR). Same length out,
// peak locations preserved.
Eigen::VectorXd bandpass(const Eigen::VectorXd& signal, double lo_hz, double hi_hz,
                         double rate_hz);

// Splits a signal into 8 s frames with a 2 s slide. Frame i covers samples
// [i*2*rate, i*2*rate + 8*rate).
std::vector<Frame> frame_stream(const Eigen::VectorXd& signal, double rate_hz,
                                int channel = 1);

// Keeps only spectral content in the union of [k*f_prev - eps, k*f_prev + eps]
// for k = 1..k_max, zeroing everything else in the frequency domain. Exact
// passband union, idempotent.
Frame harmonic_bandpass(const Frame& frame, double f_prev_hz, double eps_hz = 0.5,
                        int k_max = 4);

// Element-wise current + prev1 + prev2. All three must share channel/length.
Frame sum_previous_frames(const Frame& current, const Frame& prev1, const Frame& prev2);

// Divides by the maximum absolute sample so max |sample| == 1.
Frame normalize_to_max(const Frame& frame);

}  // namespace hrtrack
