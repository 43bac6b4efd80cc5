// core/src/clip.cc

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

#include "npasr/clip.h"

#include <cmath>
#include <cstdlib>

#include "npasr/error.h"

namespace npasr {

namespace {

double mean_abs(const std::vector<double>& x, long begin, long end) {
  double sum = 0.0;
  for (long i = begin; i < end; ++i) sum += std::fabs(x[static_cast<std::size_t>(i)]);
  return sum / static_cast<double>(end - begin);
}

}  // namespace

ClipBounds clip_bounds(const AudioSignal& signal, const ClipConfig& config) {
  NPASR_CHECK(config.window_length >= 1, "clip: window_length must be >= 1");
  const long n = static_cast<long>(signal.samples.size());
  const long w = config.window_length;
  ClipBounds bounds{0, n};
  if (n < w || n == 0) return bounds;  // no full window exists

  const double global_mean = mean_abs(signal.samples, 0, n);

  long start = 0;
  for (long idx = 0; idx + w <= n; idx += w) {
    if (mean_abs(signal.samples, idx, idx + w) > global_mean) {
      start = idx;
      break;
    }
  }

  long end = n;
  for (long idx = n - w; idx >= 0; idx -= w) {
    if (mean_abs(signal.samples, idx, idx + w) > global_mean) {
      end = idx + w;
      break;
    }
  }

  if (start >= end) return bounds;  // degenerate; leave unchanged
  bounds.start = start;
  bounds.end = end;
  return bounds;
}

AudioSignal clip_silence(const AudioSignal& signal, const ClipConfig& config) {
  const ClipBounds b = clip_bounds(signal, config);
  AudioSignal out;
  out.sample_rate = signal.sample_rate;
  out.samples.assign(signal.samples.begin() + b.start, signal.samples.begin() + b.end);
  return out;
}

}  // namespace npasr
