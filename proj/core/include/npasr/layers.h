// core/include/npasr/layers.h

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

#ifndef NPASR_LAYERS_H_
#define NPASR_LAYERS_H_

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "npasr/parameters.h"

namespace npasr {

// One utterance's activations: time rows x channel columns.
using Tensor2 = Eigen::MatrixXd;

// A batch is a list of equally-sized tensors, zero-padded beyond each
// example's true length. Layers compute only unpadded rows and keep padded
// rows at zero, so per-example math never sees batch padding.
using BatchTensor = std::vector<Tensor2>;

enum class Mode { kTrain, kInfer };

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

// Standard LSTM recurrence for one time step, gate order [input, forget,
// cell candidate, output] in blocks of hidden_size rows.
struct LstmStepResult {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};
LstmStepResult lstm_step(const Eigen::VectorXd& x_t, const Eigen::VectorXd& h_prev,
                         const Eigen::VectorXd& c_prev, const Eigen::MatrixXd& w_input,
                         const Eigen::MatrixXd& w_recurrent, const Eigen::VectorXd& bias);

// Temporal cross-correlation with "same" zero padding; output length is
// ceil(len / stride) per example.
class Conv1d {
 public:
  Conv1d(ParameterStore& store, const std::string& prefix, int in_channels,
         int out_channels, int kernel, int stride);

  void init(std::mt19937_64& rng);
  BatchTensor forward(const BatchTensor& x, const std::vector<long>& lengths, Mode mode);
  BatchTensor infer(const BatchTensor& x, const std::vector<long>& lengths) const;
  BatchTensor backward(const BatchTensor& dy);
  std::vector<long> output_lengths(const std::vector<long>& lengths) const;

  int out_channels() const { return out_channels_; }

 private:
  Tensor2 im2col(const Tensor2& x, long len) const;
  Tensor2 apply_one(const Tensor2& x, long len, long out_rows) const;

  int in_channels_, out_channels_, kernel_, stride_;
  int pad_left_ = 0;
  Parameter* weight_;  // (kernel * in) x out
  Parameter* bias_;    // 1 x out
  BatchTensor cached_x_;
  std::vector<long> cached_lengths_;
  bool has_cache_ = false;
};

// Per-channel standardization over the batch's unpadded time steps with
// learned scale/shift. Keeps running statistics for inference.
class BatchNorm1d {
 public:
  BatchNorm1d(ParameterStore& store, const std::string& prefix, int channels);

  BatchTensor forward(const BatchTensor& x, const std::vector<long>& lengths, Mode mode);
  BatchTensor infer(const BatchTensor& x, const std::vector<long>& lengths) const;
  BatchTensor backward(const BatchTensor& dy);

  bool has_running_stats() const;

  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.99;

 private:
  int channels_;
  Parameter* gamma_;
  Parameter* beta_;
  Parameter* running_mean_;
  Parameter* running_var_;
  Parameter* batch_count_;
  // Train-mode cache.
  BatchTensor cached_xhat_;
  std::vector<long> cached_lengths_;
  Eigen::RowVectorXd cached_inv_std_;
  double cached_n_ = 0;
  bool has_cache_ = false;
};

class PRelu {
 public:
  PRelu(ParameterStore& store, const std::string& prefix, int channels);

  BatchTensor forward(const BatchTensor& x, const std::vector<long>& lengths, Mode mode);
  BatchTensor infer(const BatchTensor& x, const std::vector<long>& lengths) const;
  BatchTensor backward(const BatchTensor& dy);

 private:
  BatchTensor apply(const BatchTensor& x, const std::vector<long>& lengths) const;

  int channels_;
  Parameter* slope_;  // 1 x channels, initialized to 0.25
  BatchTensor cached_x_;
  std::vector<long> cached_lengths_;
  bool has_cache_ = false;
};

// [conv -> batchnorm -> PReLU] x convs_per_block, plus the identity skip:
// output = G(x) + x. Requires stride 1 and equal channel counts so shapes
// match.
class ResidualBlock {
 public:
  ResidualBlock(ParameterStore& store, const std::string& prefix, int channels,
                int kernel, int convs_per_block);

  void init(std::mt19937_64& rng);
  BatchTensor forward(const BatchTensor& x, const std::vector<long>& lengths, Mode mode);
  BatchTensor infer(const BatchTensor& x, const std::vector<long>& lengths) const;
  BatchTensor backward(const BatchTensor& dy);

  // The stacked layers alone, without the skip connection.
  BatchTensor infer_stacked(const BatchTensor& x, const std::vector<long>& lengths) const;

 private:
  struct Unit {
    Conv1d conv;
    BatchNorm1d bn;
    PRelu act;
  };
  std::vector<Unit> units_;
};

// One recurrence direction of a (bi)LSTM over a batch.
class LstmDirection {
 public:
  LstmDirection(ParameterStore& store, const std::string& prefix, int input_dim,
                int hidden_size, bool reverse);

  void init(std::mt19937_64& rng);
  // Returns per-example T x H outputs (padded rows zero).
  BatchTensor forward(const BatchTensor& x, const std::vector<long>& lengths,
                      bool keep_cache);
  BatchTensor infer(const BatchTensor& x, const std::vector<long>& lengths) const;
  BatchTensor backward(const BatchTensor& dy);

 private:
  struct Cache {
    // One column per processed step, in processing order.
    Eigen::MatrixXd gate_i, gate_f, gate_g, gate_o, cell, tanh_cell, hidden;
  };
  long time_of_step(long step, long len) const {
    return reverse_ ? len - 1 - step : step;
  }
  BatchTensor run(const BatchTensor& x, const std::vector<long>& lengths,
                  std::vector<Cache>* caches) const;

  int input_dim_, hidden_size_;
  bool reverse_;
  Parameter* w_input_;      // 4H x input_dim
  Parameter* w_recurrent_;  // 4H x H
  Parameter* bias_;         // 4H x 1
  std::vector<Cache> cache_;
  BatchTensor cached_x_;
  std::vector<long> cached_lengths_;
  bool has_cache_ = false;
};

// Bidirectional LSTM layer: concatenated forward/backward hidden states,
// with inverted dropout on the output in train mode.
class BiLstm {
 public:
  BiLstm(ParameterStore& store, const std::string& prefix, int input_dim,
         int hidden_size);

  void init(std::mt19937_64& rng);
  BatchTensor forward(const BatchTensor& x, const std::vector<long>& lengths, Mode mode,
                      double dropout_rate, std::mt19937_64* rng);
  BatchTensor infer(const BatchTensor& x, const std::vector<long>& lengths) const;
  BatchTensor backward(const BatchTensor& dy);

 private:
  int hidden_size_;
  LstmDirection fwd_;
  LstmDirection bwd_;
  BatchTensor dropout_mask_;
  bool dropout_active_ = false;
  bool has_cache_ = false;
};

// Affine map to logits. Softmax is applied by the model.
class Dense {
 public:
  Dense(ParameterStore& store, const std::string& prefix, int input_dim, int output_dim);

  void init(std::mt19937_64& rng);
  BatchTensor forward(const BatchTensor& x, const std::vector<long>& lengths, Mode mode);
  BatchTensor infer(const BatchTensor& x, const std::vector<long>& lengths) const;
  BatchTensor backward(const BatchTensor& dy);

 private:
  BatchTensor apply(const BatchTensor& x, const std::vector<long>& lengths) const;

  int input_dim_, output_dim_;
  Parameter* weight_;  // input_dim x output_dim
  Parameter* bias_;    // 1 x output_dim
  BatchTensor cached_x_;
  std::vector<long> cached_lengths_;
  bool has_cache_ = false;
};

}  // namespace npasr

#endif  // NPASR_LAYERS_H_
