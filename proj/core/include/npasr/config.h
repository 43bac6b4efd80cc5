// core/include/npasr/config.h

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

#ifndef NPASR_CONFIG_H_
#define NPASR_CONFIG_H_

#include <string>
#include <string_view>

#include "npasr/adam.h"
#include "npasr/clip.h"
#include "npasr/mfcc.h"
#include "npasr/model.h"

namespace npasr {

// Everything the pipeline commands consume, loadable from a sectioned
// key = value file and overridable by command-line flags. Unknown sections
// or keys are rejected.
//
//   [paths]    data_dir, manifest, features_dir, checkpoint_dir
//   [clip]     window_length
//   [mfcc]     pre_emphasis, sub_hop, sub_window, fft_size, n_mels,
//              n_coeffs, stack, f_min, f_max
//   [network]  input_dim, conv_channels, kernel_size, stride,
//              residual_blocks, convs_per_block, bilstm_layers,
//              hidden_size, dropout_rate, vocab_size
//   [train]    learning_rate, beta1, beta2, epsilon, weight_decay,
//              batch_size, max_epochs, seed, speaker_split, train_fraction
//   [decode]   beam_width, greedy
struct PipelineConfig {
  std::string data_dir;
  std::string manifest;
  std::string features_dir;
  std::string checkpoint_dir;

  ClipConfig clip;
  MfccConfig mfcc;
  NetworkConfig network;
  TrainConfig train;

  bool speaker_split = false;
  double train_fraction = 0.95;
  long beam_width = 50;
  bool greedy = false;

  static PipelineConfig from_file(const std::string& path);
  static PipelineConfig from_text(std::string_view text);

  // Applies one key to one section; throws FormatError on unknown keys,
  // unknown sections, or unparsable values.
  void apply(std::string_view section, std::string_view key, std::string_view value);
};

}  // namespace npasr

#endif  // NPASR_CONFIG_H_
