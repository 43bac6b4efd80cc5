// tools/main.cc

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

#include <CLI11.hpp>
#include <iostream>

#include "commands.h"
#include "npasr/config.h"
#include "npasr/error.h"

namespace {

npasr::PipelineConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return npasr::PipelineConfig{};
  return npasr::PipelineConfig::from_file(path);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace npasr;
  using namespace npasr::cli;

  CLI::App app{"Nepali speech-to-text pipeline (clip, MFCC, CNN+ResNet+BiLSTM, CTC)"};
  app.require_subcommand(1);

  // Shared flag storage; each subcommand reads what it needs after parsing.
  std::string config_path;
  std::string manifest, audio_dir, out_dir, features_dir, checkpoint_dir, checkpoint;
  std::string report_path = "evaluation.tsv";
  long window_length = -1;
  long beam_width = -1;
  bool greedy = false, force = false, stdin_list = false;
  long seed = -1;
  int max_epochs = -1;
  std::vector<std::string> wav_paths;

  auto* prepare = app.add_subcommand(
      "prepare", "Drop numeric transcriptions and clip silent gaps from both ends");
  prepare->add_option("--manifest", manifest, "Input manifest TSV")->required();
  prepare->add_option("--audio-dir", audio_dir, "Directory with <id>.wav inputs")->required();
  prepare->add_option("--out-dir", out_dir, "Output directory for clipped WAVs + manifest.tsv")
      ->required();
  prepare->add_option("--window-length", window_length, "Silence scan window in samples");
  prepare->add_option("--config", config_path, "Pipeline config file");

  auto* featurize = app.add_subcommand("featurize", "Extract MFCC feature caches");
  featurize->add_option("--manifest", manifest, "Prepared manifest TSV")->required();
  featurize->add_option("--audio-dir", audio_dir, "Directory with prepared <id>.wav")
      ->required();
  featurize->add_option("--out-dir", out_dir, "Output directory for <id>.feat caches")
      ->required();
  featurize->add_flag("--force", force, "Rewrite caches that already exist");
  featurize->add_option("--config", config_path, "Pipeline config file");

  auto* train = app.add_subcommand("train", "Train the acoustic model");
  train->add_option("--manifest", manifest, "Prepared manifest TSV")->required();
  train->add_option("--features-dir", features_dir, "Directory with <id>.feat caches")
      ->required();
  train->add_option("--checkpoint-dir", checkpoint_dir,
                    "Output directory for checkpoints and metrics.csv")
      ->required();
  train->add_option("--seed", seed, "Split/init/shuffle seed");
  train->add_option("--max-epochs", max_epochs, "Number of training epochs");
  train->add_option("--config", config_path, "Pipeline config file");

  auto* transcribe = app.add_subcommand("transcribe", "Transcribe WAV files to text");
  transcribe->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  transcribe->add_option("wavs", wav_paths, "WAV files to transcribe");
  transcribe->add_flag("--stdin-list", stdin_list, "Read WAV paths from standard input");
  transcribe->add_option("--beam-width", beam_width, "CTC beam width");
  transcribe->add_flag("--greedy", greedy, "Greedy decoding instead of beam search");
  transcribe->add_option("--window-length", window_length, "Silence scan window in samples");
  transcribe->add_option("--config", config_path, "Pipeline config file");

  auto* evaluate = app.add_subcommand("evaluate", "Score feature caches against references");
  evaluate->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  evaluate->add_option("--manifest", manifest, "Manifest TSV with references")->required();
  evaluate->add_option("--features-dir", features_dir, "Directory with <id>.feat caches")
      ->required();
  evaluate->add_option("--beam-width", beam_width, "CTC beam width");
  evaluate->add_flag("--greedy", greedy, "Greedy decoding instead of beam search");
  evaluate->add_option("--report", report_path, "Per-utterance TSV report path");
  evaluate->add_option("--config", config_path, "Pipeline config file");

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig cfg = load_config_or_default(config_path);

    if (prepare->parsed()) {
      PrepareOptions opt;
      opt.manifest = manifest;
      opt.audio_dir = audio_dir;
      opt.out_dir = out_dir;
      opt.window_length = window_length >= 0 ? window_length : cfg.clip.window_length;
      return cmd_prepare(opt);
    }
    if (featurize->parsed()) {
      FeaturizeOptions opt;
      opt.manifest = manifest;
      opt.audio_dir = audio_dir;
      opt.out_dir = out_dir;
      opt.mfcc = cfg.mfcc;
      opt.force = force;
      return cmd_featurize(opt);
    }
    if (train->parsed()) {
      TrainOptions opt;
      opt.manifest = manifest;
      opt.features_dir = features_dir;
      opt.checkpoint_dir = checkpoint_dir;
      opt.cfg = cfg;
      if (seed >= 0) opt.cfg.train.seed = static_cast<std::uint64_t>(seed);
      if (max_epochs >= 0) opt.cfg.train.max_epochs = max_epochs;
      NPASR_CHECK(opt.cfg.train.max_epochs >= 1, "train: max_epochs must be >= 1");
      return cmd_train(opt);
    }
    if (transcribe->parsed()) {
      TranscribeOptions opt;
      opt.checkpoint = checkpoint;
      opt.wav_paths = wav_paths;
      opt.stdin_list = stdin_list;
      opt.beam_width = beam_width >= 1 ? beam_width : cfg.beam_width;
      opt.greedy = greedy || cfg.greedy;
      opt.window_length = window_length >= 0 ? window_length : cfg.clip.window_length;
      opt.mfcc = cfg.mfcc;
      return cmd_transcribe(opt);
    }
    if (evaluate->parsed()) {
      EvaluateOptions opt;
      opt.checkpoint = checkpoint;
      opt.manifest = manifest;
      opt.features_dir = features_dir;
      opt.beam_width = beam_width >= 1 ? beam_width : cfg.beam_width;
      opt.greedy = greedy || cfg.greedy;
      opt.report_path = report_path;
      return cmd_evaluate(opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "npasr: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
