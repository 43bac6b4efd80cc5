// core/include/npasr/batching.h

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

#ifndef NPASR_BATCHING_H_
#define NPASR_BATCHING_H_

#include <cstdint>
#include <string>
#include <vector>

#include "npasr/layers.h"
#include "npasr/mfcc.h"
#include "npasr/vocab.h"

namespace npasr {

struct TrainingExample {
  FeatureMatrix features;
  LabelSequence labels;
  std::string utterance_id;
};

// Feature tensors are zero-padded to the batch's max true length; lengths
// carry the per-example row counts the loss and statistics may use.
struct Batch {
  BatchTensor features;
  std::vector<long> lengths;
  std::vector<LabelSequence> labels;
  std::vector<std::string> ids;
};

// Buckets examples by ascending feature length (id as tie-break) before
// chunking, then shuffles the batch order by seed. Batch contents are
// seed-independent; only their order varies.
std::vector<Batch> make_batches(const std::vector<TrainingExample>& examples,
                                int batch_size, std::uint64_t seed);

// Deterministic Fisher-Yates with a seeded 64-bit generator; shared by the
// batching and dataset-split shuffles so runs reproduce bit-for-bit.
void seeded_shuffle_indices(std::vector<std::size_t>& indices, std::uint64_t seed);

}  // namespace npasr

#endif  // NPASR_BATCHING_H_
