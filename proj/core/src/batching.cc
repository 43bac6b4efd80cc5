// core/src/batching.cc

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

#include "npasr/batching.h"

#include <algorithm>
#include <random>

#include "npasr/error.h"

namespace npasr {

void seeded_shuffle_indices(std::vector<std::size_t>& indices, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = indices.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(indices[i - 1], indices[j]);
  }
}

std::vector<Batch> make_batches(const std::vector<TrainingExample>& examples,
                                int batch_size, std::uint64_t seed) {
  NPASR_CHECK(batch_size >= 1, "make_batches: batch_size must be >= 1");
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&examples](std::size_t a, std::size_t b) {
    const long la = examples[a].features.rows();
    const long lb = examples[b].features.rows();
    if (la != lb) return la < lb;
    return examples[a].utterance_id < examples[b].utterance_id;
  });

  const std::size_t n_batches =
      (examples.size() + static_cast<std::size_t>(batch_size) - 1) /
      static_cast<std::size_t>(batch_size);
  std::vector<Batch> batches;
  batches.reserve(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    const std::size_t begin = b * static_cast<std::size_t>(batch_size);
    const std::size_t end = std::min(begin + static_cast<std::size_t>(batch_size),
                                     examples.size());
    long max_len = 0;
    for (std::size_t i = begin; i < end; ++i) {
      max_len = std::max(max_len, examples[order[i]].features.rows());
    }
    Batch batch;
    for (std::size_t i = begin; i < end; ++i) {
      const TrainingExample& ex = examples[order[i]];
      Tensor2 padded = Tensor2::Zero(max_len, ex.features.cols());
      padded.topRows(ex.features.rows()) = ex.features.frames;
      batch.features.push_back(std::move(padded));
      batch.lengths.push_back(ex.features.rows());
      batch.labels.push_back(ex.labels);
      batch.ids.push_back(ex.utterance_id);
    }
    batches.push_back(std::move(batch));
  }

  std::vector<std::size_t> batch_order(batches.size());
  for (std::size_t i = 0; i < batch_order.size(); ++i) batch_order[i] = i;
  seeded_shuffle_indices(batch_order, seed);
  std::vector<Batch> shuffled;
  shuffled.reserve(batches.size());
  for (std::size_t i : batch_order) shuffled.push_back(std::move(batches[i]));
  return shuffled;
}

}  // namespace npasr
