// tools/commands.cc

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

#include "commands.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "npasr/audio.h"
#include "npasr/checkpoint.h"
#include "npasr/clip.h"
#include "npasr/ctc.h"
#include "npasr/error.h"
#include "npasr/manifest.h"
#include "npasr/metrics.h"
#include "npasr/mfcc.h"
#include "npasr/threading.h"
#include "npasr/trainer.h"
#include "npasr/unicode.h"

namespace npasr::cli {

namespace fs = std::filesystem;

namespace {

void require_pipeline_rate(const AudioSignal& signal, const std::string& path) {
  if (signal.sample_rate != kPipelineSampleRate) {
    throw Error(detail::str_cat(path, ": sample rate ", signal.sample_rate,
                                " is unsupported; the pipeline expects ",
                                kPipelineSampleRate, " Hz"));
  }
}

std::string wav_path(const std::string& audio_dir, const std::string& utterance_id) {
  return (fs::path(audio_dir) / (utterance_id + ".wav")).string();
}

std::string feature_path(const std::string& features_dir, const std::string& utterance_id) {
  return (fs::path(features_dir) / (utterance_id + ".feat")).string();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// prepare

int cmd_prepare(const PrepareOptions& opt) {
  const auto raw_entries = parse_manifest(opt.manifest);
  const auto entries = filter_numeric(raw_entries);
  fs::create_directories(opt.out_dir);

  struct Item {
    bool ok = false;
    std::string error;
    long in_samples = 0;
    long out_samples = 0;
  };
  std::vector<Item> items(entries.size());
  const ClipConfig clip_cfg{opt.window_length};

  parallel_for(entries.size(), [&](std::size_t i) {
    Item& item = items[i];
    try {
      const std::string in_path = wav_path(opt.audio_dir, entries[i].utterance_id);
      const AudioSignal original = load_wav(in_path);
      require_pipeline_rate(original, in_path);
      const AudioSignal clipped = clip_silence(original, clip_cfg);
      save_wav(clipped, wav_path(opt.out_dir, entries[i].utterance_id));
      item.in_samples = static_cast<long>(original.samples.size());
      item.out_samples = static_cast<long>(clipped.samples.size());
      item.ok = true;
    } catch (const std::exception& e) {
      item.error = e.what();
    }
  });

  std::vector<ManifestEntry> kept;
  long total_in = 0, total_out = 0, failures = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (items[i].ok) {
      kept.push_back(entries[i]);
      total_in += items[i].in_samples;
      total_out += items[i].out_samples;
    } else {
      ++failures;
      std::cerr << "prepare: " << entries[i].utterance_id << ": " << items[i].error << '\n';
    }
  }
  write_manifest(kept, (fs::path(opt.out_dir) / "manifest.tsv").string());

  const double ratio =
      total_in > 0 ? static_cast<double>(total_out) / static_cast<double>(total_in) : 0.0;
  std::cout << "retained_ratio\t" << format_double(ratio) << '\n';
  std::cout << "utterances\t" << kept.size() << '\n';
  std::cout << "removed_numeric\t" << (raw_entries.size() - entries.size()) << '\n';
  std::cout << "failed\t" << failures << '\n';
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// featurize

int cmd_featurize(const FeaturizeOptions& opt) {
  const auto entries = parse_manifest(opt.manifest);
  fs::create_directories(opt.out_dir);

  struct Item {
    bool ok = false;
    bool skipped = false;
    std::string error;
  };
  std::vector<Item> items(entries.size());

  parallel_for(entries.size(), [&](std::size_t i) {
    Item& item = items[i];
    const std::string out_path = feature_path(opt.out_dir, entries[i].utterance_id);
    try {
      if (!opt.force && fs::exists(out_path)) {
        item.ok = true;
        item.skipped = true;
        return;
      }
      const std::string in_path = wav_path(opt.audio_dir, entries[i].utterance_id);
      const AudioSignal signal = load_wav(in_path);
      require_pipeline_rate(signal, in_path);
      const FeatureMatrix features = extract_features(signal, opt.mfcc);
      write_feature_cache(features, out_path);
      item.ok = true;
    } catch (const std::exception& e) {
      item.error = e.what();
    }
  });

  long written = 0, skipped = 0, failures = 0;
  std::ofstream report((fs::path(opt.out_dir) / "featurize_report.tsv").string(),
                       std::ios::trunc);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!items[i].ok) {
      ++failures;
      std::cerr << "featurize: " << entries[i].utterance_id << ": " << items[i].error << '\n';
      report << entries[i].utterance_id << '\t' << items[i].error << '\n';
    } else if (items[i].skipped) {
      ++skipped;
    } else {
      ++written;
    }
  }
  std::cout << "written\t" << written << '\n';
  std::cout << "skipped_existing\t" << skipped << '\n';
  std::cout << "failed\t" << failures << '\n';
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// train

namespace {

struct LoadedSplit {
  std::vector<TrainingExample> examples;
  std::vector<std::string> references;
};

LoadedSplit load_split(const std::vector<ManifestEntry>& entries,
                       const std::string& features_dir, const Vocabulary& vocab,
                       int stride, const char* split_name) {
  LoadedSplit out;
  for (const auto& e : entries) {
    const std::string path = feature_path(features_dir, e.utterance_id);
    FeatureMatrix features;
    try {
      features = read_feature_cache(path);
    } catch (const std::exception& ex) {
      std::cerr << "train: skipping " << e.utterance_id << " (" << split_name
                << "): " << ex.what() << '\n';
      continue;
    }
    TrainingExample example;
    example.features = std::move(features);
    example.labels = vocab.encode(e.transcription);
    example.utterance_id = e.utterance_id;
    const long out_frames = (example.features.rows() + stride - 1) / stride;
    if (!ctc_feasible(out_frames, example.labels)) {
      std::cerr << "train: skipping " << e.utterance_id << " (" << split_name
                << "): target of " << example.labels.size()
                << " labels is infeasible for " << out_frames << " output frames\n";
      continue;
    }
    out.examples.push_back(std::move(example));
    out.references.push_back(e.transcription);
  }
  return out;
}

}  // namespace

int cmd_train(const TrainOptions& opt) {
  PipelineConfig cfg = opt.cfg;
  NPASR_CHECK(cfg.train.max_epochs >= 1, "train: max_epochs must be >= 1");
  cfg.train.validate();

  const auto entries = filter_numeric(parse_manifest(opt.manifest));
  NPASR_CHECK(entries.size() >= 2, "train: need at least 2 usable manifest entries");

  const auto [train_entries, test_entries] =
      cfg.speaker_split
          ? split_dataset_by_speaker(entries, cfg.train_fraction, cfg.train.seed)
          : split_dataset(entries, cfg.train_fraction, cfg.train.seed);

  std::vector<std::string> train_texts;
  train_texts.reserve(train_entries.size());
  for (const auto& e : train_entries) train_texts.push_back(e.transcription);
  const Vocabulary vocab = Vocabulary::build(train_texts);

  NetworkConfig net_cfg = cfg.network;
  net_cfg.vocab_size = vocab.size();

  LoadedSplit train_split =
      load_split(train_entries, opt.features_dir, vocab, net_cfg.stride, "train");
  LoadedSplit test_split =
      load_split(test_entries, opt.features_dir, vocab, net_cfg.stride, "test");
  NPASR_CHECK(!train_split.examples.empty(), "train: no feasible training examples");
  NPASR_CHECK(!test_split.examples.empty(), "train: no feasible test examples");
  NPASR_CHECK(train_split.examples[0].features.cols() == net_cfg.input_dim,
              "train: feature dim ", train_split.examples[0].features.cols(),
              " does not match network input_dim ", net_cfg.input_dim);

  fs::create_directories(opt.checkpoint_dir);
  const std::string metrics_path = (fs::path(opt.checkpoint_dir) / "metrics.csv").string();

  Model model(net_cfg, cfg.train.seed);
  long step_count = 0;
  double best_test_loss = std::numeric_limits<double>::infinity();
  const long eval_beam = cfg.greedy ? 0 : cfg.beam_width;

  for (int epoch = 1; epoch <= cfg.train.max_epochs; ++epoch) {
    model.seed_dropout(cfg.train.seed * 2654435761ull + static_cast<std::uint64_t>(epoch));
    const auto batches = make_batches(train_split.examples, cfg.train.batch_size,
                                      cfg.train.seed + static_cast<std::uint64_t>(epoch));
    const EpochMetrics train_metrics =
        train_epoch(model, batches, cfg.train, vocab.blank_id(), &step_count);

    const EvalSummary test_metrics =
        evaluate(model, test_split.examples, test_split.references, vocab, eval_beam);

    append_metrics_csv(metrics_path, epoch, train_metrics.mean_train_loss,
                       test_metrics.mean_loss, test_metrics.aggregate_cer);
    char epoch_name[32];
    std::snprintf(epoch_name, sizeof(epoch_name), "epoch_%03d.ckpt", epoch);
    save_checkpoint(model, vocab, (fs::path(opt.checkpoint_dir) / epoch_name).string());
    if (test_metrics.mean_loss < best_test_loss) {
      best_test_loss = test_metrics.mean_loss;
      save_checkpoint(model, vocab, (fs::path(opt.checkpoint_dir) / "best.ckpt").string());
    }
    std::cout << "epoch\t" << epoch << "\ttrain_loss\t"
              << format_double(train_metrics.mean_train_loss) << "\ttest_loss\t"
              << format_double(test_metrics.mean_loss) << "\ttest_cer\t"
              << format_double(test_metrics.aggregate_cer) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// transcribe

int cmd_transcribe(const TranscribeOptions& opt) {
  std::vector<std::string> paths = opt.wav_paths;
  if (opt.stdin_list) {
    std::string line;
    while (std::getline(std::cin, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) paths.push_back(line);
    }
  }
  NPASR_CHECK(!paths.empty(), "transcribe: no input files (pass paths or --stdin-list)");

  const LoadedCheckpoint ckpt = load_checkpoint(opt.checkpoint);
  const Model& model = *ckpt.model;
  const ClipConfig clip_cfg{opt.window_length};
  const long beam = opt.greedy ? 0 : opt.beam_width;
  NPASR_CHECK(opt.greedy || opt.beam_width >= 1, "transcribe: beam width must be >= 1");

  struct Item {
    bool ok = false;
    std::string id;
    std::string text;
    std::string error;
  };
  std::vector<Item> items(paths.size());

  parallel_for(paths.size(), [&](std::size_t i) {
    Item& item = items[i];
    item.id = fs::path(paths[i]).stem().string();
    try {
      const AudioSignal raw = load_wav(paths[i]);
      require_pipeline_rate(raw, paths[i]);
      const AudioSignal clipped = clip_silence(raw, clip_cfg);
      const FeatureMatrix features = extract_features(clipped, opt.mfcc);
      NPASR_CHECK(features.cols() == model.config().input_dim, "feature dim ",
                  features.cols(), " does not match checkpoint input_dim ",
                  model.config().input_dim);
      const Eigen::MatrixXd posteriors = model.infer_one(features.frames);
      item.text = beam >= 1 ? beam_search_decode(posteriors, ckpt.vocab, beam)
                            : greedy_decode(posteriors, ckpt.vocab);
      item.ok = true;
    } catch (const std::exception& e) {
      item.error = e.what();
    }
  });

  long failures = 0;
  for (const Item& item : items) {
    if (item.ok) {
      std::cout << item.id << '\t' << item.text << '\n';
    } else {
      ++failures;
      std::cerr << "transcribe: " << item.id << ": " << item.error << '\n';
    }
  }
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// evaluate

int cmd_evaluate(const EvaluateOptions& opt) {
  const auto entries = parse_manifest(opt.manifest);
  NPASR_CHECK(!entries.empty(), "evaluate: empty manifest");
  const LoadedCheckpoint ckpt = load_checkpoint(opt.checkpoint);
  const Model& model = *ckpt.model;
  const long beam = opt.greedy ? 0 : opt.beam_width;
  NPASR_CHECK(opt.greedy || opt.beam_width >= 1, "evaluate: beam width must be >= 1");

  struct Item {
    bool ok = false;
    std::string hypothesis;
    long edits = -1;
    double cer = -1.0;
    std::string error;
  };
  std::vector<Item> items(entries.size());

  parallel_for(entries.size(), [&](std::size_t i) {
    Item& item = items[i];
    try {
      const FeatureMatrix features =
          read_feature_cache(feature_path(opt.features_dir, entries[i].utterance_id));
      NPASR_CHECK(features.cols() == model.config().input_dim, "feature dim ",
                  features.cols(), " does not match checkpoint input_dim ",
                  model.config().input_dim);
      const Eigen::MatrixXd posteriors = model.infer_one(features.frames);
      item.hypothesis = beam >= 1 ? beam_search_decode(posteriors, ckpt.vocab, beam)
                                  : greedy_decode(posteriors, ckpt.vocab);
      const EvalResult scored = score_pair(entries[i].transcription, item.hypothesis);
      item.edits = scored.edits;
      item.cer = scored.cer;
      item.ok = true;
    } catch (const std::exception& e) {
      item.error = e.what();
    }
  });

  std::ofstream report(opt.report_path, std::ios::trunc);
  if (!report) throw Error("cannot open for writing: " + opt.report_path);
  long total_edits = 0, total_ref = 0, failures = 0, scored_count = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Item& item = items[i];
    if (item.ok) {
      total_edits += item.edits;
      total_ref += static_cast<long>(decode_utf8(entries[i].transcription).size());
      ++scored_count;
      report << entries[i].utterance_id << '\t' << entries[i].transcription << '\t'
             << item.hypothesis << '\t' << item.edits << '\t' << format_double(item.cer)
             << '\n';
    } else {
      ++failures;
      std::cerr << "evaluate: " << entries[i].utterance_id << ": " << item.error << '\n';
      report << entries[i].utterance_id << '\t' << entries[i].transcription << '\t'
             << "ERROR: " << item.error << '\t' << -1 << '\t' << format_double(-1.0)
             << '\n';
    }
  }
  const double aggregate =
      total_ref > 0 ? static_cast<double>(total_edits) / static_cast<double>(total_ref) : 0.0;
  std::cout << "aggregate_cer\t" << format_double(aggregate) << '\n';
  std::cout << "scored\t" << scored_count << '\n';
  std::cout << "errors\t" << failures << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace npasr::cli
