// core/src/model.cc

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

#include "npasr/model.h"

#include <cmath>
#include <map>
#include <sstream>

#include "npasr/error.h"

namespace npasr {

namespace {

#ifndef NDEBUG
void debug_check_finite(const BatchTensor& x, const char* where) {
  for (const auto& m : x) {
    NPASR_CHECK(m.allFinite(), "non-finite activation after ", where);
  }
}
#else
void debug_check_finite(const BatchTensor&, const char*) {}
#endif

}  // namespace

void NetworkConfig::validate() const {
  NPASR_CHECK(input_dim >= 1, "network: input_dim must be >= 1");
  NPASR_CHECK(conv_channels >= 1, "network: conv_channels must be >= 1");
  NPASR_CHECK(kernel_size >= 1, "network: kernel_size must be >= 1");
  NPASR_CHECK(stride >= 1, "network: stride must be >= 1");
  NPASR_CHECK(residual_blocks >= 0, "network: residual_blocks must be >= 0");
  NPASR_CHECK(convs_per_block >= 1, "network: convs_per_block must be >= 1");
  NPASR_CHECK(bilstm_layers >= 1, "network: bilstm_layers must be >= 1");
  NPASR_CHECK(hidden_size >= 1, "network: hidden_size must be >= 1");
  NPASR_CHECK(dropout_rate >= 0.0 && dropout_rate < 1.0,
              "network: need 0 <= dropout_rate < 1");
  NPASR_CHECK(vocab_size >= 2, "network: vocab_size must be >= 2");
}

std::string NetworkConfig::to_key_value_text() const {
  std::ostringstream os;
  os << "input_dim=" << input_dim << '\n'
     << "conv_channels=" << conv_channels << '\n'
     << "kernel_size=" << kernel_size << '\n'
     << "stride=" << stride << '\n'
     << "residual_blocks=" << residual_blocks << '\n'
     << "convs_per_block=" << convs_per_block << '\n'
     << "bilstm_layers=" << bilstm_layers << '\n'
     << "hidden_size=" << hidden_size << '\n'
     << "dropout_rate=" << dropout_rate << '\n'
     << "vocab_size=" << vocab_size << '\n';
  return os.str();
}

NetworkConfig NetworkConfig::from_key_value_text(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("network config: malformed line '" + std::string(line) + "'");
    }
    kv.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  NetworkConfig cfg;
  auto take_int = [&kv](const char* key, int* out) {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(std::string("network config: missing key ") + key);
    *out = std::stoi(it->second);
    kv.erase(it);
  };
  take_int("input_dim", &cfg.input_dim);
  take_int("conv_channels", &cfg.conv_channels);
  take_int("kernel_size", &cfg.kernel_size);
  take_int("stride", &cfg.stride);
  take_int("residual_blocks", &cfg.residual_blocks);
  take_int("convs_per_block", &cfg.convs_per_block);
  take_int("bilstm_layers", &cfg.bilstm_layers);
  take_int("hidden_size", &cfg.hidden_size);
  {
    auto it = kv.find("dropout_rate");
    if (it == kv.end()) throw FormatError("network config: missing key dropout_rate");
    cfg.dropout_rate = std::stod(it->second);
    kv.erase(it);
  }
  take_int("vocab_size", &cfg.vocab_size);
  if (!kv.empty()) {
    throw FormatError("network config: unknown key '" + kv.begin()->first + "'");
  }
  cfg.validate();
  return cfg;
}

Model::Model(const NetworkConfig& config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  input_conv_ = std::make_unique<Conv1d>(store_, "input_conv", config_.input_dim,
                                         config_.conv_channels, config_.kernel_size,
                                         config_.stride);
  for (int b = 0; b < config_.residual_blocks; ++b) {
    blocks_.push_back(std::make_unique<ResidualBlock>(
        store_, "block" + std::to_string(b), config_.conv_channels, config_.kernel_size,
        config_.convs_per_block));
  }
  int in_dim = config_.conv_channels;
  for (int l = 0; l < config_.bilstm_layers; ++l) {
    bilstms_.push_back(std::make_unique<BiLstm>(store_, "bilstm" + std::to_string(l),
                                                in_dim, config_.hidden_size));
    in_dim = 2 * config_.hidden_size;
  }
  dense_ = std::make_unique<Dense>(store_, "dense", in_dim, config_.vocab_size);

  std::mt19937_64 init_rng(init_seed);
  input_conv_->init(init_rng);
  for (auto& b : blocks_) b->init(init_rng);
  for (auto& l : bilstms_) l->init(init_rng);
  dense_->init(init_rng);
  rng_.seed(init_seed);
}

std::vector<long> Model::output_lengths(const std::vector<long>& lengths) const {
  return input_conv_->output_lengths(lengths);
}

BatchTensor Model::forward(const BatchTensor& features, const std::vector<long>& lengths,
                           Mode mode) {
  for (const auto& f : features) {
    NPASR_CHECK(f.cols() == config_.input_dim, "model: feature dim ", f.cols(),
                " does not match input_dim ", config_.input_dim);
  }
  const std::vector<long> out_lengths = input_conv_->output_lengths(lengths);
  BatchTensor h = input_conv_->forward(features, lengths, mode);
  debug_check_finite(h, "input conv");
  for (auto& block : blocks_) {
    h = block->forward(h, out_lengths, mode);
    debug_check_finite(h, "residual block");
  }
  for (auto& layer : bilstms_) {
    h = layer->forward(h, out_lengths, mode, config_.dropout_rate,
                       mode == Mode::kTrain ? &rng_ : nullptr);
    debug_check_finite(h, "bilstm");
  }
  logits_ = dense_->forward(h, out_lengths, mode);
  debug_check_finite(logits_, "dense");

  BatchTensor posteriors(logits_.size());
  for (std::size_t i = 0; i < logits_.size(); ++i) {
    posteriors[i] = Tensor2::Zero(logits_[i].rows(), logits_[i].cols());
    posteriors[i].topRows(out_lengths[i]) =
        softmax_rows(logits_[i].topRows(out_lengths[i]));
  }
  trained_forward_ = (mode == Mode::kTrain);
  return posteriors;
}

BatchTensor Model::infer(const BatchTensor& features, const std::vector<long>& lengths) const {
  for (const auto& f : features) {
    NPASR_CHECK(f.cols() == config_.input_dim, "model: feature dim ", f.cols(),
                " does not match input_dim ", config_.input_dim);
  }
  const std::vector<long> out_lengths = input_conv_->output_lengths(lengths);
  BatchTensor h = input_conv_->infer(features, lengths);
  for (const auto& block : blocks_) h = block->infer(h, out_lengths);
  for (const auto& layer : bilstms_) h = layer->infer(h, out_lengths);
  BatchTensor logits = dense_->infer(h, out_lengths);
  BatchTensor posteriors(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    posteriors[i] = Tensor2::Zero(logits[i].rows(), logits[i].cols());
    posteriors[i].topRows(out_lengths[i]) =
        softmax_rows(logits[i].topRows(out_lengths[i]));
  }
  return posteriors;
}

Eigen::MatrixXd Model::infer_one(const Eigen::MatrixXd& features) const {
  const BatchTensor out = infer({features}, {features.rows()});
  const long out_len = output_lengths({features.rows()})[0];
  return out[0].topRows(out_len);
}

void Model::backward(const BatchTensor& dlogits) {
  NPASR_CHECK(trained_forward_, "model: backward without a train-mode forward");
  BatchTensor d = dense_->backward(dlogits);
  for (auto it = bilstms_.rbegin(); it != bilstms_.rend(); ++it) {
    d = (*it)->backward(d);
  }
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    d = (*it)->backward(d);
  }
  input_conv_->backward(d);
}

std::size_t count_params(const NetworkConfig& config) {
  return Model(config, 0).num_trainable_params();
}

}  // namespace npasr
