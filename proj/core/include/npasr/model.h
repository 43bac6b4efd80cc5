// core/include/npasr/model.h

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

#ifndef NPASR_MODEL_H_
#define NPASR_MODEL_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "npasr/layers.h"
#include "npasr/parameters.h"

namespace npasr {

// Acoustic model hyperparameters. The defaults build the
// conv + 5 residual blocks + 2 BiLSTM stack at ~1.55M trainable values.
struct NetworkConfig {
  int input_dim = 52;
  int conv_channels = 64;
  int kernel_size = 3;
  int stride = 1;  // input convolution only; residual blocks use stride 1
  int residual_blocks = 5;
  int convs_per_block = 2;
  int bilstm_layers = 2;
  int hidden_size = 200;  // per direction
  double dropout_rate = 0.25;
  int vocab_size = 66;

  void validate() const;

  // key=value lines, one per field; round-trips through from_key_value_text.
  std::string to_key_value_text() const;
  static NetworkConfig from_key_value_text(std::string_view text);
};

// Input conv (input_dim -> conv_channels) -> residual blocks -> BiLSTM
// stack -> dense + softmax over vocab_size. A model instance is
// single-writer: forward/backward/update must not run concurrently on one
// instance, but `infer` is const and safe to call from many threads on a
// frozen model.
class Model {
 public:
  Model(const NetworkConfig& config, std::uint64_t init_seed = 0);

  const NetworkConfig& config() const { return config_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }

  // Posterior matrices (rows sum to 1 over unpadded rows; padded rows
  // zero). Train mode caches activations for backward and draws dropout
  // masks from the seeded generator.
  BatchTensor forward(const BatchTensor& features, const std::vector<long>& lengths,
                      Mode mode);

  // Cache-free const inference path.
  BatchTensor infer(const BatchTensor& features, const std::vector<long>& lengths) const;
  Eigen::MatrixXd infer_one(const Eigen::MatrixXd& features) const;

  // Output lengths after the (possibly strided) input convolution, for the
  // last forward/infer batch shape.
  std::vector<long> output_lengths(const std::vector<long>& lengths) const;

  // Pre-softmax activations from the last forward call.
  const BatchTensor& logits() const { return logits_; }

  // Accumulates parameter gradients from the upstream gradient on logits.
  // Requires a previous train-mode forward.
  void backward(const BatchTensor& dlogits);

  std::size_t num_trainable_params() const { return store_.trainable_count(); }

  void seed_dropout(std::uint64_t seed) { rng_.seed(seed); }

 private:
  NetworkConfig config_;
  ParameterStore store_;
  std::unique_ptr<Conv1d> input_conv_;
  std::vector<std::unique_ptr<ResidualBlock>> blocks_;
  std::vector<std::unique_ptr<BiLstm>> bilstms_;
  std::unique_ptr<Dense> dense_;
  std::mt19937_64 rng_;
  BatchTensor logits_;
  bool trained_forward_ = false;
};

// Total trainable scalar parameters of the model the config builds.
std::size_t count_params(const NetworkConfig& config);

}  // namespace npasr

#endif  // NPASR_MODEL_H_
