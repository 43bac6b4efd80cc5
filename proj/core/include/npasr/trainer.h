// core/include/npasr/trainer.h

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

#ifndef NPASR_TRAINER_H_
#define NPASR_TRAINER_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "npasr/adam.h"
#include "npasr/batching.h"
#include "npasr/manifest.h"
#include "npasr/metrics.h"
#include "npasr/model.h"
#include "npasr/vocab.h"

namespace npasr {

// Seed-deterministic shuffle, then a split at round(train_fraction * N)
// clamped so both sides are non-empty. Disjoint and covering.
std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> split_dataset(
    const std::vector<ManifestEntry>& entries, double train_fraction, std::uint64_t seed);

// Utterance sets of whole speakers; the train side reaches at least
// train_fraction of utterances before closing.
std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> split_dataset_by_speaker(
    const std::vector<ManifestEntry>& entries, double train_fraction, std::uint64_t seed);

struct EpochMetrics {
  double mean_train_loss = 0.0;
  long examples = 0;
  long steps = 0;
};

// One pass over the batches: train-mode forward, per-example CTC loss
// (mean over the batch), backward, Adam. step_count advances once per
// batch and persists across epochs for bias correction.
EpochMetrics train_epoch(Model& model, const std::vector<Batch>& batches,
                         const TrainConfig& config, int blank_id, long* step_count);

struct UtteranceEval {
  std::string utterance_id;
  std::string reference;
  std::string hypothesis;
  long edits = 0;
  double cer = 0.0;
  double loss = 0.0;
};

struct EvalSummary {
  double mean_loss = 0.0;
  double aggregate_cer = 0.0;  // total edits / total reference length
  long total_edits = 0;
  long total_ref_length = 0;
  std::vector<UtteranceEval> utterances;
};

// Transcribes every example with beam search (beam_width 0 selects greedy
// decoding) in inference mode and scores against the references.
// references[i] pairs with examples[i]. Throws on an empty example set.
EvalSummary evaluate(const Model& model, const std::vector<TrainingExample>& examples,
                     const std::vector<std::string>& references, const Vocabulary& vocab,
                     long beam_width);

// Appends "epoch,train_loss,test_loss,test_cer" rows, writing the header
// when the file does not yet exist.
void append_metrics_csv(const std::string& path, int epoch, double train_loss,
                        double test_loss, double test_cer);

}  // namespace npasr

#endif  // NPASR_TRAINER_H_
