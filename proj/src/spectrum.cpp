#include "hrtrack/spectrum.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace hrtrack {

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

struct PeakBases {
  double prominence = 0.0;
  int left_base = 0;
  int right_base = 0;
};

// Topographic prominence within [lo, hi]: walk outward until a strictly
// higher sample or the range edge, taking the minimum along each side.
PeakBases peak_prominence(const Eigen::VectorXd& m, int peak, int lo, int hi) {
  PeakBases out;
  double left_min = m[peak];
  int left_base = peak;
  for (int i = peak - 1; i >= lo; --i) {
    if (m[i] > m[peak]) break;
    if (m[i] < left_min) {
      left_min = m[i];
      left_base = i;
    }
  }
  double right_min = m[peak];
  int right_base = peak;
  for (int i = peak + 1; i <= hi; ++i) {
    if (m[i] > m[peak]) break;
    if (m[i] < right_min) {
      right_min = m[i];
      right_base = i;
    }
  }
  out.prominence = m[peak] - std::max(left_min, right_min);
  out.left_base = left_base;
  out.right_base = right_base;
  return out;
}

double peak_width(const Eigen::VectorXd& m, int peak, const PeakBases& bases) {
  const double height = m[peak] - 0.5 * bases.prominence;
  int i = peak;
  while (i > bases.left_base && m[i] > height) --i;
  double left_ip = static_cast<double>(i);
  if (m[i] < height) {
    left_ip += (height - m[i]) / (m[i + 1] - m[i]);
  }
  int j = peak;
  while (j < bases.right_base && m[j] > height) ++j;
  double right_ip = static_cast<double>(j);
  if (m[j] < height) {
    right_ip -= (height - m[j]) / (m[j - 1] - m[j]);
  }
  return right_ip - left_ip;
}

}  // namespace

ArModel fit_ar(const Frame& frame, int order) {
  const Eigen::Index n = frame.samples.size();
  if (order < 1) {
    throw std::invalid_argument("spectrum: AR order must be >= 1");
  }
  if (n <= order) {
    throw std::invalid_argument("spectrum: frame shorter than AR order + 1");
  }

  Eigen::VectorXd f = frame.samples;
  Eigen::VectorXd b = frame.samples;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(order + 1);
  a[0] = 1.0;
  Eigen::VectorXd reflections = Eigen::VectorXd::Zero(order);
  double energy = frame.samples.squaredNorm() / static_cast<double>(n);
  double den0 = 0.0;

  for (int m = 1; m <= order; ++m) {
    const Eigen::Index len = n - m;
    const auto f_seg = f.segment(m, len);
    const auto b_seg = b.segment(m - 1, len);
    const double num = f_seg.dot(b_seg);
    const double den = f_seg.squaredNorm() + b_seg.squaredNorm();
    if (m == 1) {
      if (den <= 0.0) {
        throw std::runtime_error("spectrum: cannot fit AR model to an all-zero frame");
      }
      den0 = den;
    }
    // Residual energy exhausted (noiseless tones): stop, remaining stages are 0.
    if (den <= 1.0e-20 * den0) break;

    const double k = -2.0 * num / den;
    if (!(std::abs(k) < 1.0)) {
      if (m == 1) {
        throw std::runtime_error("spectrum: numerically singular frame (constant signal)");
      }
      break;
    }

    const Eigen::VectorXd prev = a.head(m);
    for (int i = 1; i < m; ++i) {
      a[i] = prev[i] + k * prev[m - i];
    }
    a[m] = k;
    reflections[m - 1] = k;

    const Eigen::VectorXd b_prev = b.segment(m - 1, len);
    b.segment(m, len) = b_prev + k * f.segment(m, len);
    f.segment(m, len) += k * b_prev;
    energy *= (1.0 - k * k);
  }

  ArModel model;
  model.coeffs = std::move(a);
  model.reflections = std::move(reflections);
  model.noise_variance = energy;
  model.rate_hz = frame.rate_hz;
  model.channel = frame.channel;
  return model;
}

SpectrumEstimate ar_psd(const ArModel& model, int n_points) {
  if (n_points < 2 || model.coeffs.size() < 2) {
    throw std::invalid_argument("spectrum: invalid model or grid size");
  }
  if (model.coeffs[0] != 1.0 || model.reflections.cwiseAbs().maxCoeff() >= 1.0) {
    throw std::runtime_error("spectrum: unstable AR model");
  }

  std::vector<std::complex<double>> padded(static_cast<std::size_t>(n_points), 0.0);
  for (Eigen::Index i = 0; i < model.coeffs.size(); ++i) {
    padded[static_cast<std::size_t>(i)] = model.coeffs[i];
  }
  std::vector<std::complex<double>> response;
  fft_engine().fwd(response, padded);

  SpectrumEstimate spec;
  spec.rate_hz = model.rate_hz;
  spec.channel = model.channel;
  spec.magnitudes.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double denom = std::max(std::abs(response[static_cast<std::size_t>(i)]), 1e-300);
    spec.magnitudes[i] = 1.0 / denom;
  }
  spec.magnitudes /= spec.magnitudes.maxCoeff();
  return spec;
}

std::vector<SpectralPeak> find_peaks(const SpectrumEstimate& spec, double search_lo_hz,
                                     double search_hi_hz) {
  const int n = spec.n_points();
  if (!(search_lo_hz >= 0.0 && search_lo_hz < search_hi_hz &&
        search_hi_hz <= spec.rate_hz / 2.0)) {
    throw std::invalid_argument("spectrum: empty or invalid peak search range");
  }
  const int lo = static_cast<int>(std::ceil(search_lo_hz * n / spec.rate_hz));
  const int hi = std::min(static_cast<int>(std::floor(search_hi_hz * n / spec.rate_hz)),
                          n / 2);
  const Eigen::VectorXd& m = spec.magnitudes;

  std::vector<SpectralPeak> peaks;
  int i = lo + 1;
  while (i <= hi - 1) {
    if (m[i] > m[i - 1]) {
      int j = i;
      while (j + 1 <= hi && m[j + 1] == m[i]) ++j;
      if (j + 1 <= hi && m[j + 1] < m[i]) {
        const PeakBases bases = peak_prominence(m, i, lo, hi);
        SpectralPeak p;
        p.index = i;
        p.magnitude = m[i];
        p.prominence = bases.prominence;
        p.width = peak_width(m, i, bases);
        peaks.push_back(p);
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  return peaks;
}

double index_to_bpm(double index, int n_points, double rate_hz) {
  if (index < 0.0 || index > n_points / 2.0) {
    throw std::invalid_argument("spectrum: index outside [0, n/2]");
  }
  return index * rate_hz * 60.0 / static_cast<double>(n_points);
}

double bpm_to_index(double bpm, int n_points, double rate_hz) {
  if (bpm <= 0.0) {
    throw std::invalid_argument("spectrum: BPM must be positive");
  }
  return bpm * static_cast<double>(n_points) / (60.0 * rate_hz);
}

}  // namespace hrtrack
