// core/include/npasr/mfcc.h

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

#ifndef NPASR_MFCC_H_
#define NPASR_MFCC_H_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "npasr/audio.h"

namespace npasr {

// MFCC analysis settings. The defaults produce 13 coefficients on
// 160-sample windows every 40 samples, with 4 consecutive sub-frames
// stacked into one 52-dimensional frame at ~100 frames per second.
struct MfccConfig {
  double pre_emphasis = 0.97;
  int sub_hop = 40;       // samples between analysis positions
  int sub_window = 160;   // analysis window length in samples
  int fft_size = 256;     // power of two, >= sub_window
  int n_mels = 13;
  int n_coeffs = 13;      // <= n_mels
  int stack = 4;          // sub-frames per output frame
  double f_min = 0.0;     // Hz
  double f_max = 8000.0;  // Hz, <= Nyquist

  // Throws on violated invariants (including f_max above Nyquist for the
  // given sample rate, and non-power-of-two fft_size).
  void validate(int sample_rate) const;

  int feature_dim() const { return n_coeffs * stack; }
  long min_signal_length() const {
    return static_cast<long>(stack) * sub_hop + (sub_window - sub_hop);
  }
};

// T x D matrix of per-utterance input frames, one row per frame.
struct FeatureMatrix {
  Eigen::MatrixXd frames;
  double frame_rate = 0.0;  // frames per second

  long rows() const { return frames.rows(); }
  long cols() const { return frames.cols(); }
};

// y[0] = x[0]; y[t] = x[t] - alpha * x[t-1].
AudioSignal pre_emphasize(const AudioSignal& signal, double alpha);

// Sub-frames start at 0, sub_hop, 2*sub_hop, ... while a full sub_window
// fits; each is multiplied by a Hamming window. Throws if the signal is
// shorter than one sub_window.
std::vector<Eigen::VectorXd> frame_and_window(const AudioSignal& signal,
                                              const MfccConfig& config);

// Zero-pads to fft_size and returns |DFT_k|^2 / fft_size for
// k = 0 .. fft_size/2. fft_size must be a power of two.
Eigen::VectorXd power_spectrum(const Eigen::VectorXd& sub_frame, int fft_size);

// Mel scale: mel(f) = 2595 * log10(1 + f / 700), and its exact inverse.
double mel(double hz);
double inverse_mel(double mels);

// n_mels triangular filters over fft_size/2 + 1 bins. Edge frequencies are
// equally spaced on the mel scale between f_min and f_max, mapped back to
// Hz and snapped to FFT bins.
Eigen::MatrixXd mel_filterbank(const MfccConfig& config, int sample_rate);

// Orthonormal DCT-II of log(filterbank * power + 1e-10), truncated to
// n_coeffs.
Eigen::VectorXd log_mel_and_dct(const Eigen::VectorXd& power,
                                const Eigen::MatrixXd& filterbank, int n_coeffs);

// Full pipeline: pre-emphasis, framing/windowing, power spectrum, mel
// filterbank, log-DCT, stacking of non-overlapping groups of `stack`
// sub-frame vectors, then per-column normalization.
FeatureMatrix extract_features(const AudioSignal& signal, const MfccConfig& config);

// Per-column zero mean, unit standard deviation over the utterance.
// Columns with (numerically) zero variance become all-zero.
FeatureMatrix normalize_features(const FeatureMatrix& matrix);

// Feature cache: magic "NPFEAT01", rows and cols as u32 LE, then row-major
// f32 LE values.
void write_feature_cache(const FeatureMatrix& matrix, const std::string& path);
FeatureMatrix read_feature_cache(const std::string& path, double frame_rate = 100.0);

inline constexpr char kFeatureCacheMagic[] = "NPFEAT01";

}  // namespace npasr

#endif  // NPASR_MFCC_H_
