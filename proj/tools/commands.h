// tools/commands.h

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

#ifndef NPASR_TOOLS_COMMANDS_H_
#define NPASR_TOOLS_COMMANDS_H_

#include <string>
#include <vector>

#include "npasr/config.h"

namespace npasr::cli {

struct PrepareOptions {
  std::string manifest;
  std::string audio_dir;
  std::string out_dir;
  long window_length = 500;
};
int cmd_prepare(const PrepareOptions& opt);

struct FeaturizeOptions {
  std::string manifest;
  std::string audio_dir;
  std::string out_dir;
  MfccConfig mfcc;
  bool force = false;
};
int cmd_featurize(const FeaturizeOptions& opt);

struct TrainOptions {
  std::string manifest;
  std::string features_dir;
  std::string checkpoint_dir;
  PipelineConfig cfg;
};
int cmd_train(const TrainOptions& opt);

struct TranscribeOptions {
  std::string checkpoint;
  std::vector<std::string> wav_paths;
  bool stdin_list = false;
  long beam_width = 50;
  bool greedy = false;
  long window_length = 500;
  MfccConfig mfcc;
};
int cmd_transcribe(const TranscribeOptions& opt);

struct EvaluateOptions {
  std::string checkpoint;
  std::string manifest;
  std::string features_dir;
  std::string report_path = "evaluation.tsv";
  long beam_width = 50;
  bool greedy = false;
};
int cmd_evaluate(const EvaluateOptions& opt);

}  // namespace npasr::cli

#endif  // NPASR_TOOLS_COMMANDS_H_
