#include "hrtrack/preprocess.hpp"

#include "hrtrack/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace hrtrack {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

// Butterworth band-pass as cascaded biquads via the bilinear transform.
// `order` is the low-pass prototype order (must be even); the band-pass has
// 2*order poles. Every section carries one zero at z=1 and one at z=-1.
std::vector<Biquad> design_butter_bandpass(int order, double lo_hz, double hi_hz,
                                           double rate_hz) {
  using cd = std::complex<double>;
  const double fs2 = 2.0 * rate_hz;
  const double w_lo = fs2 * std::tan(kPi * lo_hz / rate_hz);
  const double w_hi = fs2 * std::tan(kPi * hi_hz / rate_hz);
  const double bw = w_hi - w_lo;
  const double w0sq = w_lo * w_hi;

  std::vector<cd> s_poles;
  s_poles.reserve(static_cast<std::size_t>(2 * order));
  for (int m = 0; m < order; ++m) {
    const double angle = kPi * (2.0 * m + order + 1.0) / (2.0 * order);
    const cd proto(std::cos(angle), std::sin(angle));
    const cd pb = proto * bw;
    const cd disc = std::sqrt(pb * pb - 4.0 * w0sq);
    s_poles.push_back((pb + disc) / 2.0);
    s_poles.push_back((pb - disc) / 2.0);
  }

  std::vector<cd> z_poles;
  for (const cd& s : s_poles) {
    if (s.imag() > 0.0) {
      z_poles.push_back((fs2 + s) / (fs2 - s));
    }
  }
  if (static_cast<int>(z_poles.size()) != order) {
    throw std::runtime_error("preprocess: band-pass pole pairing failed");
  }

  std::vector<Biquad> sections;
  sections.reserve(z_poles.size());
  for (const cd& zp : z_poles) {
    Biquad s{1.0, 0.0, -1.0, -2.0 * zp.real(), std::norm(zp)};
    sections.push_back(s);
  }

  // Normalize gain to 1 at the geometric band center.
  const double wc = 2.0 * kPi * std::sqrt(lo_hz * hi_hz) / rate_hz;
  const cd z = std::polar(1.0, wc);
  const cd zi1 = 1.0 / z;
  const cd zi2 = zi1 * zi1;
  cd h(1.0, 0.0);
  for (const Biquad& s : sections) {
    h *= (s.b0 + s.b1 * zi1 + s.b2 * zi2) / (1.0 + s.a1 * zi1 + s.a2 * zi2);
  }
  const double gain = 1.0 / std::abs(h);
  sections.front().b0 *= gain;
  sections.front().b1 *= gain;
  sections.front().b2 *= gain;
  return sections;
}

// Steady-state filter state for a unit-step input (transposed direct form II),
// scaled by the first sample so a constant signal passes without transient.
std::pair<double, double> step_state(const Biquad& s) {
  const double h = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  const double z2 = s.b2 - s.a2 * h;
  const double z1 = s.b1 - s.a1 * h + z2;
  return {z1, z2};
}

void run_sos(const std::vector<Biquad>& sections, Eigen::VectorXd& x) {
  for (const Biquad& s : sections) {
    const auto [zi1, zi2] = step_state(s);
    double z1 = zi1 * x[0];
    double z2 = zi2 * x[0];
    for (Eigen::Index n = 0; n < x.size(); ++n) {
      const double in = x[n];
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      x[n] = out;
    }
  }
}

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

}  // namespace

int window_count(Eigen::Index n_samples, double rate_hz) {
  const auto w = static_cast<Eigen::Index>(std::llround(8.0 * rate_hz));
  const auto s = static_cast<Eigen::Index>(std::llround(2.0 * rate_hz));
  if (n_samples < w) return 0;
  return static_cast<int>((n_samples - w) / s) + 1;
}

Eigen::VectorXd bandpass(const Eigen::VectorXd& signal, double lo_hz, double hi_hz,
                         double rate_hz) {
  if (!(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < rate_hz / 2.0)) {
    throw std::invalid_argument("preprocess: band edges must satisfy 0 < lo < hi < rate/2");
  }
  const Eigen::Index n = signal.size();
  if (n < 2) {
    throw std::invalid_argument("preprocess: signal too short to filter");
  }

  const std::vector<Biquad> sections = design_butter_bandpass(4, lo_hz, hi_hz, rate_hz);

  // Odd reflection padding at both ends keeps edge transients off the data.
  const Eigen::Index pad = std::min<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(3.0 * rate_hz)), n - 1);
  Eigen::VectorXd ext(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) {
    ext[i] = 2.0 * signal[0] - signal[pad - i];
  }
  ext.segment(pad, n) = signal;
  for (Eigen::Index i = 0; i < pad; ++i) {
    ext[pad + n + i] = 2.0 * signal[n - 1] - signal[n - 2 - i];
  }

  run_sos(sections, ext);
  ext.reverseInPlace();
  run_sos(sections, ext);
  ext.reverseInPlace();
  return ext.segment(pad, n);
}

std::vector<Frame> frame_stream(const Eigen::VectorXd& signal, double rate_hz,
                                int channel) {
  if (rate_hz <= 0.0) {
    throw std::invalid_argument("preprocess: rate must be positive");
  }
  const auto w = static_cast<Eigen::Index>(std::llround(8.0 * rate_hz));
  const auto s = static_cast<Eigen::Index>(std::llround(2.0 * rate_hz));
  if (signal.size() < w) {
    throw std::invalid_argument("preprocess: signal shorter than one 8 s window");
  }
  const int count = window_count(signal.size(), rate_hz);
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Frame f;
    f.samples = signal.segment(static_cast<Eigen::Index>(i) * s, w);
    f.window_index = i;
    f.channel = channel;
    f.rate_hz = rate_hz;
    frames.push_back(std::move(f));
  }
  return frames;
}

Frame harmonic_bandpass(const Frame& frame, double f_prev_hz, double eps_hz, int k_max) {
  if (f_prev_hz <= 0.0 || eps_hz < 0.0 || k_max < 1) {
    throw std::invalid_argument("preprocess: invalid harmonic band parameters");
  }
  if (k_max * f_prev_hz + eps_hz >= frame.rate_hz / 2.0) {
    throw std::invalid_argument("preprocess: harmonic band exceeds Nyquist");
  }
  const Eigen::Index n = frame.samples.size();
  std::vector<std::complex<double>> spectrum;
  std::vector<double> data(frame.samples.data(), frame.samples.data() + n);
  fft_engine().fwd(spectrum, data);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double f_signed = (i <= n / 2) ? static_cast<double>(i)
                                         : static_cast<double>(i) - static_cast<double>(n);
    const double f = std::abs(f_signed) * frame.rate_hz / static_cast<double>(n);
    bool keep = false;
    for (int k = 1; k <= k_max; ++k) {
      if (std::abs(f - k * f_prev_hz) <= eps_hz) {
        keep = true;
        break;
      }
    }
    if (!keep) spectrum[static_cast<std::size_t>(i)] = 0.0;
  }

  std::vector<double> out;
  fft_engine().inv(out, spectrum);
  Frame result = frame;
  result.samples = Eigen::Map<const Eigen::VectorXd>(out.data(), n);
  return result;
}

Frame sum_previous_frames(const Frame& current, const Frame& prev1, const Frame& prev2) {
  if (current.samples.size() != prev1.samples.size() ||
      current.samples.size() != prev2.samples.size()) {
    throw std::invalid_argument("preprocess: frame length mismatch");
  }
  if (current.channel != prev1.channel || current.channel != prev2.channel) {
    throw std::invalid_argument("preprocess: frame channel mismatch");
  }
  Frame result = current;
  result.samples = current.samples + prev1.samples + prev2.samples;
  return result;
}

Frame normalize_to_max(const Frame& frame) {
  const double m = frame.samples.cwiseAbs().maxCoeff();
  if (m <= 0.0) {
    throw std::invalid_argument("preprocess: cannot normalize an all-zero frame");
  }
  Frame result = frame;
  result.samples = frame.samples / m;
  return result;
}

}  // namespace hrtrack
