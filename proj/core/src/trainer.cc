// core/src/trainer.cc

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

#include "npasr/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "npasr/ctc.h"
#include "npasr/error.h"
#include "npasr/unicode.h"

namespace npasr {

std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> split_dataset(
    const std::vector<ManifestEntry>& entries, double train_fraction, std::uint64_t seed) {
  NPASR_CHECK(train_fraction > 0.0 && train_fraction < 1.0,
              "split_dataset: need 0 < train_fraction < 1");
  NPASR_CHECK(entries.size() >= 2, "split_dataset: need at least 2 entries");
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  seeded_shuffle_indices(order, seed);

  const long n = static_cast<long>(entries.size());
  long n_train = std::lround(train_fraction * static_cast<double>(n));
  n_train = std::clamp(n_train, 1l, n - 1);

  std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> out;
  for (long i = 0; i < n; ++i) {
    const ManifestEntry& e = entries[order[static_cast<std::size_t>(i)]];
    if (i < n_train) {
      out.first.push_back(e);
    } else {
      out.second.push_back(e);
    }
  }
  return out;
}

std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> split_dataset_by_speaker(
    const std::vector<ManifestEntry>& entries, double train_fraction, std::uint64_t seed) {
  NPASR_CHECK(train_fraction > 0.0 && train_fraction < 1.0,
              "split_dataset: need 0 < train_fraction < 1");
  NPASR_CHECK(entries.size() >= 2, "split_dataset: need at least 2 entries");
  std::map<std::string, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    by_speaker[entries[i].speaker_id].push_back(i);
  }
  NPASR_CHECK(by_speaker.size() >= 2,
              "split_dataset: speaker-disjoint split needs at least 2 speakers");
  std::vector<std::string> speakers;
  speakers.reserve(by_speaker.size());
  for (const auto& [spk, idxs] : by_speaker) speakers.push_back(spk);
  std::vector<std::size_t> order(speakers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  seeded_shuffle_indices(order, seed);

  const std::size_t want_train =
      static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(entries.size())));
  std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> out;
  std::size_t taken = 0;
  std::size_t spk_index = 0;
  for (; spk_index < order.size(); ++spk_index) {
    // Keep at least one speaker for the test side.
    if (taken >= want_train || spk_index + 1 == order.size()) break;
    for (std::size_t i : by_speaker[speakers[order[spk_index]]]) {
      out.first.push_back(entries[i]);
    }
    taken += by_speaker[speakers[order[spk_index]]].size();
  }
  for (; spk_index < order.size(); ++spk_index) {
    for (std::size_t i : by_speaker[speakers[order[spk_index]]]) {
      out.second.push_back(entries[i]);
    }
  }
  NPASR_CHECK(!out.first.empty() && !out.second.empty(),
              "split_dataset: speaker split left one side empty");
  return out;
}

EpochMetrics train_epoch(Model& model, const std::vector<Batch>& batches,
                         const TrainConfig& config, int blank_id, long* step_count) {
  NPASR_CHECK(!batches.empty(), "train_epoch: empty batch list");
  NPASR_CHECK(step_count != nullptr, "train_epoch: missing step counter");
  config.validate();

  EpochMetrics metrics;
  double loss_sum = 0.0;
  for (const Batch& batch : batches) {
    const std::size_t b = batch.features.size();
    NPASR_CHECK(b >= 1, "train_epoch: empty batch");
    const BatchTensor posteriors = model.forward(batch.features, batch.lengths, Mode::kTrain);
    const std::vector<long> out_lengths = model.output_lengths(batch.lengths);

    BatchTensor dlogits(b);
    for (std::size_t i = 0; i < b; ++i) {
      const long out_len = out_lengths[i];
      double loss = 0.0;
      Eigen::MatrixXd g =
          ctc_grad(posteriors[i].topRows(out_len), batch.labels[i], blank_id, &loss);
      NPASR_CHECK(std::isfinite(loss), "train_epoch: non-finite loss on utterance ",
                  batch.ids[i]);
      loss_sum += loss;
      dlogits[i] = Tensor2::Zero(posteriors[i].rows(), posteriors[i].cols());
      // Mean over the batch.
      dlogits[i].topRows(out_len) = g / static_cast<double>(b);
    }
    metrics.examples += static_cast<long>(b);

    model.params().zero_grad();
    model.backward(dlogits);
    adam_step(model.params(), config, ++*step_count);
    ++metrics.steps;
  }
  metrics.mean_train_loss = loss_sum / static_cast<double>(metrics.examples);
  return metrics;
}

EvalSummary evaluate(const Model& model, const std::vector<TrainingExample>& examples,
                     const std::vector<std::string>& references, const Vocabulary& vocab,
                     long beam_width) {
  NPASR_CHECK(!examples.empty(), "evaluate: empty example set");
  NPASR_CHECK(examples.size() == references.size(),
              "evaluate: examples and references differ in size");
  EvalSummary summary;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Eigen::MatrixXd posteriors = model.infer_one(examples[i].features.frames);
    UtteranceEval u;
    u.utterance_id = examples[i].utterance_id;
    u.reference = references[i];
    u.hypothesis = beam_width >= 1 ? beam_search_decode(posteriors, vocab, beam_width)
                                   : greedy_decode(posteriors, vocab);
    u.loss = ctc_loss(posteriors, examples[i].labels, vocab.blank_id());
    const EvalResult scored = score_pair(u.reference, u.hypothesis);
    u.edits = scored.edits;
    u.cer = scored.cer;
    loss_sum += u.loss;
    summary.total_edits += scored.edits;
    summary.total_ref_length += static_cast<long>(decode_utf8(u.reference).size());
    summary.utterances.push_back(std::move(u));
  }
  summary.mean_loss = loss_sum / static_cast<double>(examples.size());
  summary.aggregate_cer = static_cast<double>(summary.total_edits) /
                          static_cast<double>(std::max<long>(1, summary.total_ref_length));
  return summary;
}

void append_metrics_csv(const std::string& path, int epoch, double train_loss,
                        double test_loss, double test_cer) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream os(path, std::ios::app);
  if (!os) throw Error("cannot open for appending: " + path);
  if (fresh) os << "epoch,train_loss,test_loss,test_cer\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", epoch, train_loss, test_loss,
                test_cer);
  os << line;
  os.flush();
  if (!os) throw Error("write failed: " + path);
}

}  // namespace npasr
