// core/include/npasr/audio.h

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

#ifndef NPASR_AUDIO_H_
#define NPASR_AUDIO_H_

#include <string>
#include <vector>

namespace npasr {

// Mono waveform with amplitudes normalized to [-1, 1]. The supported
// pipeline rate is 16 kHz; other rates are representable but rejected by
// the CLI pipeline.
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

constexpr int kPipelineSampleRate = 16000;

// Reads a RIFF/WAVE file. Requires PCM (format 1), one channel, 16-bit
// samples; throws FormatError naming the offending header field otherwise.
// Integer samples are divided by 32768.
AudioSignal load_wav(const std::string& path);

// Writes PCM16 mono. Samples are scaled by 32768, rounded, and clamped to
// [-32768, 32767], so amplitude 1.0 stores as 32767.
void save_wav(const AudioSignal& signal, const std::string& path);

}  // namespace npasr

#endif  // NPASR_AUDIO_H_
