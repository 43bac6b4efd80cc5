// core/include/npasr/clip.h

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

#ifndef NPASR_CLIP_H_
#define NPASR_CLIP_H_

#include "npasr/audio.h"

namespace npasr {

struct ClipConfig {
  long window_length = 500;  // samples; sized for 16 kHz input
};

// Half-open sample range [start, end) into the original signal.
struct ClipBounds {
  long start = 0;
  long end = 0;
};

// Sliding-window end-point silence detection. Both scans run over the
// original signal against its global mean absolute amplitude (computed in
// double precision): the head scan walks idx = 0, w, 2w, ... and stops at
// the first window whose mean |amplitude| strictly exceeds the global
// mean; the tail scan walks idx = N-w, N-2w, ... and keeps through the end
// of its first triggering window. A scan that never triggers leaves its
// boundary at the signal edge. Signals shorter than a window, and the
// degenerate start >= end case, return the full range.
ClipBounds clip_bounds(const AudioSignal& signal, const ClipConfig& config);

// Slices the signal to clip_bounds. Output samples are bit-identical to a
// contiguous sub-range of the input.
AudioSignal clip_silence(const AudioSignal& signal, const ClipConfig& config);

}  // namespace npasr

#endif  // NPASR_CLIP_H_
