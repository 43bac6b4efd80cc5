// core/include/npasr/checkpoint.h

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

#ifndef NPASR_CHECKPOINT_H_
#define NPASR_CHECKPOINT_H_

#include <memory>
#include <string>

#include "npasr/model.h"
#include "npasr/vocab.h"

namespace npasr {

// Checkpoint layout (all integers u32 little-endian, values f32 LE):
//   magic "NPASR001"
//   u32 length + network config as key=value text
//   u32 length + vocabulary text (one token per line)
//   per parameter until EOF: u32 name length + name, u32 rank,
//     rank dims, prod(dims) values.
inline constexpr char kCheckpointMagic[] = "NPASR001";

struct LoadedCheckpoint {
  NetworkConfig config;
  Vocabulary vocab;
  std::unique_ptr<Model> model;
};

void save_checkpoint(const Model& model, const Vocabulary& vocab, const std::string& path);

// Rebuilds the model from the stored config and fills every parameter.
// Throws FormatError on a bad magic, truncation, unknown or missing
// parameters, or dimension mismatches (including a vocabulary whose size
// disagrees with the stored config).
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace npasr

#endif  // NPASR_CHECKPOINT_H_
