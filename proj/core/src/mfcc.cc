// core/src/mfcc.cc

// Copyright 2026  NPASR Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "npasr/mfcc.h"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "npasr/binary_io.h"
#include "npasr/error.h"

namespace npasr {

namespace {

constexpr double kLogFloor = 1e-10;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place. n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

Eigen::VectorXd hamming_window(int length) {
  Eigen::VectorXd w(length);
  if (length == 1) {
    w(0) = 1.0;
    return w;
  }
  for (int i = 0; i < length; ++i) {
    w(i) = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (length - 1));
  }
  return w;
}

}  // namespace

void MfccConfig::validate(int sample_rate) const {
  NPASR_CHECK(sample_rate > 0, "mfcc: sample rate must be positive");
  NPASR_CHECK(sub_hop >= 1, "mfcc: sub_hop must be >= 1");
  NPASR_CHECK(sub_window >= 1, "mfcc: sub_window must be >= 1");
  NPASR_CHECK(fft_size >= sub_window, "mfcc: fft_size (", fft_size,
              ") must be >= sub_window (", sub_window, ")");
  NPASR_CHECK(is_power_of_two(fft_size), "mfcc: fft_size (", fft_size,
              ") must be a power of two");
  NPASR_CHECK(n_mels >= 1, "mfcc: n_mels must be >= 1");
  NPASR_CHECK(n_coeffs >= 1 && n_coeffs <= n_mels,
              "mfcc: need 1 <= n_coeffs <= n_mels");
  NPASR_CHECK(stack >= 1, "mfcc: stack must be >= 1");
  NPASR_CHECK(pre_emphasis >= 0.0 && pre_emphasis < 1.0,
              "mfcc: need 0 <= pre_emphasis < 1");
  NPASR_CHECK(f_min >= 0.0 && f_min < f_max, "mfcc: need 0 <= f_min < f_max");
  NPASR_CHECK(f_max <= sample_rate / 2.0, "mfcc: f_max (", f_max,
              ") exceeds Nyquist (", sample_rate / 2.0, ")");
}

AudioSignal pre_emphasize(const AudioSignal& signal, double alpha) {
  NPASR_CHECK(alpha >= 0.0 && alpha < 1.0, "pre_emphasize: need 0 <= alpha < 1");
  AudioSignal out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(signal.samples.size());
  if (signal.samples.empty()) return out;
  out.samples[0] = signal.samples[0];
  for (std::size_t t = 1; t < signal.samples.size(); ++t) {
    out.samples[t] = signal.samples[t] - alpha * signal.samples[t - 1];
  }
  return out;
}

std::vector<Eigen::VectorXd> frame_and_window(const AudioSignal& signal,
                                              const MfccConfig& config) {
  const long n = static_cast<long>(signal.samples.size());
  if (n < config.sub_window) {
    throw Error(detail::str_cat("frame_and_window: signal of ", n,
                                " samples is shorter than one window (",
                                config.sub_window, ")"));
  }
  const Eigen::VectorXd window = hamming_window(config.sub_window);
  std::vector<Eigen::VectorXd> frames;
  frames.reserve(static_cast<std::size_t>((n - config.sub_window) / config.sub_hop + 1));
  for (long start = 0; start + config.sub_window <= n; start += config.sub_hop) {
    Eigen::VectorXd f(config.sub_window);
    for (int i = 0; i < config.sub_window; ++i) {
      f(i) = signal.samples[static_cast<std::size_t>(start + i)] * window(i);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

Eigen::VectorXd power_spectrum(const Eigen::VectorXd& sub_frame, int fft_size) {
  NPASR_CHECK(is_power_of_two(fft_size), "power_spectrum: fft_size must be a power of two");
  NPASR_CHECK(sub_frame.size() <= fft_size,
              "power_spectrum: frame longer than fft_size");
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(fft_size),
                                        std::complex<double>(0.0, 0.0));
  for (long i = 0; i < sub_frame.size(); ++i) buf[static_cast<std::size_t>(i)] = sub_frame(i);
  fft_inplace(buf);
  Eigen::VectorXd power(fft_size / 2 + 1);
  for (int k = 0; k <= fft_size / 2; ++k) {
    power(k) = std::norm(buf[static_cast<std::size_t>(k)]) / fft_size;
  }
  return power;
}

double mel(double hz) {
  NPASR_CHECK(hz >= 0.0, "mel: frequency must be non-negative");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double inverse_mel(double mels) {
  NPASR_CHECK(mels >= 0.0, "inverse_mel: mel value must be non-negative");
  return 700.0 * (std::pow(10.0, mels / 2595.0) - 1.0);
}

Eigen::MatrixXd mel_filterbank(const MfccConfig& config, int sample_rate) {
  config.validate(sample_rate);
  const int n_bins = config.fft_size / 2 + 1;
  const double mel_lo = mel(config.f_min);
  const double mel_hi = mel(config.f_max);

  // n_mels + 2 edge points, equally spaced in mel, snapped to bin indices.
  std::vector<int> edge_bin(static_cast<std::size_t>(config.n_mels) + 2);
  for (int i = 0; i < config.n_mels + 2; ++i) {
    const double m = mel_lo + (mel_hi - mel_lo) * i / (config.n_mels + 1);
    const double hz = inverse_mel(m);
    edge_bin[static_cast<std::size_t>(i)] =
        static_cast<int>(std::floor((config.fft_size + 1) * hz / sample_rate));
  }

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(config.n_mels, n_bins);
  for (int m = 0; m < config.n_mels; ++m) {
    const int lo = edge_bin[static_cast<std::size_t>(m)];
    const int mid = edge_bin[static_cast<std::size_t>(m) + 1];
    const int hi = edge_bin[static_cast<std::size_t>(m) + 2];
    for (int k = lo + 1; k <= mid && k < n_bins; ++k) {
      fb(m, k) = static_cast<double>(k - lo) / (mid - lo);
    }
    for (int k = mid + 1; k < hi && k < n_bins; ++k) {
      fb(m, k) = static_cast<double>(hi - k) / (hi - mid);
    }
  }
  return fb;
}

Eigen::VectorXd log_mel_and_dct(const Eigen::VectorXd& power,
                                const Eigen::MatrixXd& filterbank, int n_coeffs) {
  const int n_mels = static_cast<int>(filterbank.rows());
  NPASR_CHECK(n_coeffs >= 1 && n_coeffs <= n_mels,
              "log_mel_and_dct: need 1 <= n_coeffs <= n_mels");
  NPASR_CHECK(power.size() == filterbank.cols(),
              "log_mel_and_dct: power spectrum size ", power.size(),
              " does not match filterbank bins ", filterbank.cols());
  const Eigen::VectorXd energies = filterbank * power;
  Eigen::VectorXd log_e(n_mels);
  for (int i = 0; i < n_mels; ++i) log_e(i) = std::log(energies(i) + kLogFloor);

  // Orthonormal DCT-II.
  Eigen::VectorXd coeffs(n_coeffs);
  for (int k = 0; k < n_coeffs; ++k) {
    double sum = 0.0;
    for (int n = 0; n < n_mels; ++n) {
      sum += log_e(n) * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * n_mels));
    }
    const double scale = (k == 0) ? std::sqrt(1.0 / n_mels) : std::sqrt(2.0 / n_mels);
    coeffs(k) = scale * sum;
  }
  return coeffs;
}

FeatureMatrix extract_features(const AudioSignal& signal, const MfccConfig& config) {
  config.validate(signal.sample_rate);
  const long n = static_cast<long>(signal.samples.size());
  if (n < config.min_signal_length()) {
    throw Error(detail::str_cat("extract_features: signal of ", n,
                                " samples is shorter than the minimum ",
                                config.min_signal_length()));
  }

  const AudioSignal emphasized = pre_emphasize(signal, config.pre_emphasis);
  const std::vector<Eigen::VectorXd> sub_frames = frame_and_window(emphasized, config);
  const Eigen::MatrixXd fb = mel_filterbank(config, signal.sample_rate);

  const long n_sub = static_cast<long>(sub_frames.size());
  const long n_out = n_sub / config.stack;
  NPASR_CHECK(n_out >= 1, "extract_features: not enough sub-frames to stack");

  FeatureMatrix out;
  out.frames.resize(n_out, config.feature_dim());
  for (long t = 0; t < n_out; ++t) {
    for (int s = 0; s < config.stack; ++s) {
      const Eigen::VectorXd power =
          power_spectrum(sub_frames[static_cast<std::size_t>(t * config.stack + s)],
                         config.fft_size);
      out.frames.row(t).segment(static_cast<long>(s) * config.n_coeffs, config.n_coeffs) =
          log_mel_and_dct(power, fb, config.n_coeffs).transpose();
    }
  }
  out.frame_rate = static_cast<double>(signal.sample_rate) /
                   (static_cast<double>(config.sub_hop) * config.stack);
  return normalize_features(out);
}

FeatureMatrix normalize_features(const FeatureMatrix& matrix) {
  const long t_count = matrix.frames.rows();
  NPASR_CHECK(t_count >= 1, "normalize_features: empty feature matrix");
  FeatureMatrix out;
  out.frame_rate = matrix.frame_rate;
  out.frames.resizeLike(matrix.frames);
  for (long c = 0; c < matrix.frames.cols(); ++c) {
    const double mean = matrix.frames.col(c).mean();
    const double var =
        (matrix.frames.col(c).array() - mean).square().sum() / static_cast<double>(t_count);
    const double stddev = std::sqrt(var);
    // Constant columns can carry a rounding-level stddev; zero them outright.
    if (stddev <= 1e-12 * std::max(1.0, std::fabs(mean))) {
      out.frames.col(c).setZero();
    } else {
      out.frames.col(c) = (matrix.frames.col(c).array() - mean) / stddev;
    }
  }
  return out;
}

void write_feature_cache(const FeatureMatrix& matrix, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open for writing: " + path);
  write_bytes(os, kFeatureCacheMagic, 8);
  write_u32(os, static_cast<std::uint32_t>(matrix.frames.rows()));
  write_u32(os, static_cast<std::uint32_t>(matrix.frames.cols()));
  for (long r = 0; r < matrix.frames.rows(); ++r) {
    for (long c = 0; c < matrix.frames.cols(); ++c) {
      write_f32(os, static_cast<float>(matrix.frames(r, c)));
    }
  }
  os.flush();
  if (!os) throw Error("write failed: " + path);
}

FeatureMatrix read_feature_cache(const std::string& path, double frame_rate) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open feature cache: " + path);
  char magic[8];
  read_bytes(is, magic, 8, "feature cache magic");
  if (std::string(magic, 8) != kFeatureCacheMagic) {
    throw FormatError(path + ": bad feature cache magic");
  }
  const std::uint32_t rows = read_u32(is, "feature cache rows");
  const std::uint32_t cols = read_u32(is, "feature cache cols");
  FeatureMatrix out;
  out.frame_rate = frame_rate;
  out.frames.resize(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      out.frames(r, c) = read_f32(is, "feature cache values");
    }
  }
  return out;
}

}  // namespace npasr
