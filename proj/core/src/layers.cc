// core/src/layers.cc

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

#include "npasr/layers.h"

#include <cmath>

#include "npasr/error.h"

namespace npasr {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::VectorXd sigmoid_vec(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

void uniform_init(Eigen::MatrixXd& m, double limit, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (long c = 0; c < m.cols(); ++c) {
    for (long r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  }
}

void check_batch(const BatchTensor& x, const std::vector<long>& lengths) {
  NPASR_CHECK(x.size() == lengths.size(), "layer: batch size ", x.size(),
              " does not match lengths size ", lengths.size());
  NPASR_CHECK(!x.empty(), "layer: empty batch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    NPASR_CHECK(lengths[i] >= 1 && lengths[i] <= x[i].rows(),
                "layer: length ", lengths[i], " out of range for ", x[i].rows(),
                " rows");
  }
}

}  // namespace

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (long r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    Eigen::ArrayXd e = (logits.row(r).transpose().array() - m).exp();
    out.row(r) = (e / e.sum()).matrix().transpose();
  }
  return out;
}

LstmStepResult lstm_step(const Eigen::VectorXd& x_t, const Eigen::VectorXd& h_prev,
                         const Eigen::VectorXd& c_prev, const Eigen::MatrixXd& w_input,
                         const Eigen::MatrixXd& w_recurrent, const Eigen::VectorXd& bias) {
  const long h_size = h_prev.size();
  NPASR_CHECK(w_input.rows() == 4 * h_size && w_recurrent.rows() == 4 * h_size &&
                  bias.size() == 4 * h_size && w_input.cols() == x_t.size() &&
                  w_recurrent.cols() == h_size && c_prev.size() == h_size,
              "lstm_step: dimension mismatch");
  const Eigen::VectorXd z = w_input * x_t + w_recurrent * h_prev + bias;
  const Eigen::VectorXd i = sigmoid_vec(z.head(h_size));
  const Eigen::VectorXd f = sigmoid_vec(z.segment(h_size, h_size));
  const Eigen::VectorXd g = z.segment(2 * h_size, h_size).array().tanh().matrix();
  const Eigen::VectorXd o = sigmoid_vec(z.tail(h_size));
  LstmStepResult r;
  r.c = (f.array() * c_prev.array() + i.array() * g.array()).matrix();
  r.h = (o.array() * r.c.array().tanh()).matrix();
  return r;
}

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(ParameterStore& store, const std::string& prefix, int in_channels,
               int out_channels, int kernel, int stride)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride) {
  NPASR_CHECK(in_channels >= 1 && out_channels >= 1 && kernel >= 1 && stride >= 1,
              "conv1d: bad shape arguments");
  weight_ = store.create(prefix + ".weight", static_cast<long>(kernel) * in_channels,
                         out_channels,
                         {static_cast<std::size_t>(kernel), static_cast<std::size_t>(in_channels),
                          static_cast<std::size_t>(out_channels)});
  bias_ = store.create(prefix + ".bias", 1, out_channels,
                       {static_cast<std::size_t>(out_channels)});
}

void Conv1d::init(std::mt19937_64& rng) {
  const double limit = std::sqrt(1.0 / (static_cast<double>(kernel_) * in_channels_));
  uniform_init(weight_->value, limit, rng);
  bias_->value.setZero();
}

std::vector<long> Conv1d::output_lengths(const std::vector<long>& lengths) const {
  std::vector<long> out(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    out[i] = (lengths[i] + stride_ - 1) / stride_;
  }
  return out;
}

Tensor2 Conv1d::im2col(const Tensor2& x, long len) const {
  const long out_len = (len + stride_ - 1) / stride_;
  const long total_pad = std::max<long>(0, (out_len - 1) * stride_ + kernel_ - len);
  const long pad_left = total_pad / 2;
  Tensor2 col = Tensor2::Zero(out_len, static_cast<long>(kernel_) * in_channels_);
  for (long t = 0; t < out_len; ++t) {
    for (int dk = 0; dk < kernel_; ++dk) {
      const long src = t * stride_ - pad_left + dk;
      if (src < 0 || src >= len) continue;
      col.block(t, static_cast<long>(dk) * in_channels_, 1, in_channels_) =
          x.block(src, 0, 1, in_channels_);
    }
  }
  return col;
}

Tensor2 Conv1d::apply_one(const Tensor2& x, long len, long out_rows) const {
  const long out_len = (len + stride_ - 1) / stride_;
  Tensor2 y = Tensor2::Zero(out_rows, out_channels_);
  y.topRows(out_len) = im2col(x, len) * weight_->value;
  y.topRows(out_len).rowwise() += bias_->value.row(0);
  return y;
}

BatchTensor Conv1d::forward(const BatchTensor& x, const std::vector<long>& lengths,
                            Mode mode) {
  BatchTensor y = infer(x, lengths);
  if (mode == Mode::kTrain) {
    cached_x_ = x;
    cached_lengths_ = lengths;
    has_cache_ = true;
  } else {
    has_cache_ = false;
  }
  return y;
}

BatchTensor Conv1d::infer(const BatchTensor& x, const std::vector<long>& lengths) const {
  check_batch(x, lengths);
  for (const auto& xi : x) {
    NPASR_CHECK(xi.cols() == in_channels_, "conv1d: input has ", xi.cols(),
                " channels, expected ", in_channels_);
  }
  const long out_rows = (x[0].rows() + stride_ - 1) / stride_;
  BatchTensor y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = apply_one(x[i], lengths[i], out_rows);
  }
  return y;
}

BatchTensor Conv1d::backward(const BatchTensor& dy) {
  NPASR_CHECK(has_cache_, "conv1d: backward without cached forward");
  BatchTensor dx(dy.size());
  for (std::size_t n = 0; n < dy.size(); ++n) {
    const long len = cached_lengths_[n];
    const long out_len = (len + stride_ - 1) / stride_;
    const long total_pad = std::max<long>(0, (out_len - 1) * stride_ + kernel_ - len);
    const long pad_left = total_pad / 2;

    const Tensor2 col = im2col(cached_x_[n], len);
    const Tensor2 dy_valid = dy[n].topRows(out_len);
    weight_->grad.noalias() += col.transpose() * dy_valid;
    bias_->grad.row(0) += dy_valid.colwise().sum();

    const Tensor2 dcol = dy_valid * weight_->value.transpose();
    Tensor2 dxi = Tensor2::Zero(cached_x_[n].rows(), in_channels_);
    for (long t = 0; t < out_len; ++t) {
      for (int dk = 0; dk < kernel_; ++dk) {
        const long src = t * stride_ - pad_left + dk;
        if (src < 0 || src >= len) continue;
        dxi.block(src, 0, 1, in_channels_) +=
            dcol.block(t, static_cast<long>(dk) * in_channels_, 1, in_channels_);
      }
    }
    dx[n] = std::move(dxi);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm1d

BatchNorm1d::BatchNorm1d(ParameterStore& store, const std::string& prefix, int channels)
    : channels_(channels) {
  gamma_ = store.create(prefix + ".gamma", 1, channels, {static_cast<std::size_t>(channels)});
  beta_ = store.create(prefix + ".beta", 1, channels, {static_cast<std::size_t>(channels)});
  running_mean_ = store.create(prefix + ".running_mean", 1, channels,
                               {static_cast<std::size_t>(channels)}, /*trainable=*/false);
  running_var_ = store.create(prefix + ".running_var", 1, channels,
                              {static_cast<std::size_t>(channels)}, /*trainable=*/false);
  batch_count_ = store.create(prefix + ".batch_count", 1, 1, {1}, /*trainable=*/false);
  gamma_->value.setOnes();
  running_var_->value.setOnes();
}

bool BatchNorm1d::has_running_stats() const { return batch_count_->value(0, 0) > 0.0; }

BatchTensor BatchNorm1d::forward(const BatchTensor& x, const std::vector<long>& lengths,
                                 Mode mode) {
  if (mode == Mode::kInfer) {
    has_cache_ = false;
    return infer(x, lengths);
  }
  check_batch(x, lengths);

  // Statistics pool every unpadded time step in the batch.
  double n = 0;
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(channels_);
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += x[i].topRows(lengths[i]).colwise().sum();
    n += static_cast<double>(lengths[i]);
  }
  const Eigen::RowVectorXd mean = sum / n;
  Eigen::RowVectorXd sq_sum = Eigen::RowVectorXd::Zero(channels_);
  for (std::size_t i = 0; i < x.size(); ++i) {
    sq_sum += (x[i].topRows(lengths[i]).rowwise() - mean)
                  .array()
                  .square()
                  .colwise()
                  .sum()
                  .matrix();
  }
  const Eigen::RowVectorXd var = sq_sum / n;
  const Eigen::RowVectorXd inv_std =
      (var.array() + kEpsilon).sqrt().inverse().matrix();

  BatchTensor y(x.size());
  cached_xhat_.assign(x.size(), Tensor2());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long len = lengths[i];
    Tensor2 xhat = Tensor2::Zero(x[i].rows(), channels_);
    xhat.topRows(len) =
        (x[i].topRows(len).rowwise() - mean) * inv_std.asDiagonal();
    y[i] = Tensor2::Zero(x[i].rows(), channels_);
    y[i].topRows(len) = xhat.topRows(len) * gamma_->value.row(0).asDiagonal();
    y[i].topRows(len).rowwise() += beta_->value.row(0);
    cached_xhat_[i] = std::move(xhat);
  }

  running_mean_->value.row(0) =
      kMomentum * running_mean_->value.row(0) + (1.0 - kMomentum) * mean;
  running_var_->value.row(0) =
      kMomentum * running_var_->value.row(0) + (1.0 - kMomentum) * var;
  batch_count_->value(0, 0) += 1.0;

  cached_lengths_ = lengths;
  cached_inv_std_ = inv_std;
  cached_n_ = n;
  has_cache_ = true;
  return y;
}

BatchTensor BatchNorm1d::infer(const BatchTensor& x, const std::vector<long>& lengths) const {
  check_batch(x, lengths);
  if (!has_running_stats()) {
    throw Error("batchnorm: inference requested before any training step");
  }
  const Eigen::RowVectorXd inv_std =
      (running_var_->value.row(0).array() + kEpsilon).sqrt().inverse().matrix();
  BatchTensor y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long len = lengths[i];
    y[i] = Tensor2::Zero(x[i].rows(), channels_);
    y[i].topRows(len) = (x[i].topRows(len).rowwise() - running_mean_->value.row(0)) *
                        inv_std.asDiagonal() * gamma_->value.row(0).asDiagonal();
    y[i].topRows(len).rowwise() += beta_->value.row(0);
  }
  return y;
}

BatchTensor BatchNorm1d::backward(const BatchTensor& dy) {
  NPASR_CHECK(has_cache_, "batchnorm: backward without cached forward");
  Eigen::RowVectorXd sum_dy = Eigen::RowVectorXd::Zero(channels_);
  Eigen::RowVectorXd sum_dy_xhat = Eigen::RowVectorXd::Zero(channels_);
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const long len = cached_lengths_[i];
    sum_dy += dy[i].topRows(len).colwise().sum();
    sum_dy_xhat += dy[i]
                       .topRows(len)
                       .cwiseProduct(cached_xhat_[i].topRows(len))
                       .colwise()
                       .sum();
  }
  gamma_->grad.row(0) += sum_dy_xhat;
  beta_->grad.row(0) += sum_dy;

  const Eigen::RowVectorXd scale =
      (gamma_->value.row(0).array() * cached_inv_std_.array() / cached_n_).matrix();
  BatchTensor dx(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const long len = cached_lengths_[i];
    Tensor2 term = cached_n_ * dy[i].topRows(len);
    term.rowwise() -= sum_dy;
    term -= cached_xhat_[i].topRows(len) * sum_dy_xhat.asDiagonal();
    dx[i] = Tensor2::Zero(dy[i].rows(), channels_);
    dx[i].topRows(len) = term * scale.asDiagonal();
  }
  return dx;
}

// ---------------------------------------------------------------------------
// PRelu

PRelu::PRelu(ParameterStore& store, const std::string& prefix, int channels)
    : channels_(channels) {
  slope_ = store.create(prefix + ".slope", 1, channels, {static_cast<std::size_t>(channels)});
  slope_->value.setConstant(0.25);
}

BatchTensor PRelu::apply(const BatchTensor& x, const std::vector<long>& lengths) const {
  BatchTensor y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long len = lengths[i];
    const Tensor2 neg = x[i].topRows(len) * slope_->value.row(0).asDiagonal();
    y[i] = Tensor2::Zero(x[i].rows(), x[i].cols());
    y[i].topRows(len) =
        (x[i].topRows(len).array() > 0.0).select(x[i].topRows(len), neg);
  }
  return y;
}

BatchTensor PRelu::forward(const BatchTensor& x, const std::vector<long>& lengths, Mode mode) {
  check_batch(x, lengths);
  BatchTensor y = apply(x, lengths);
  if (mode == Mode::kTrain) {
    cached_x_ = x;
    cached_lengths_ = lengths;
    has_cache_ = true;
  } else {
    has_cache_ = false;
  }
  return y;
}

BatchTensor PRelu::infer(const BatchTensor& x, const std::vector<long>& lengths) const {
  check_batch(x, lengths);
  return apply(x, lengths);
}

BatchTensor PRelu::backward(const BatchTensor& dy) {
  NPASR_CHECK(has_cache_, "prelu: backward without cached forward");
  BatchTensor dx(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const long len = cached_lengths_[i];
    const Tensor2 x_valid = cached_x_[i].topRows(len);
    const Tensor2 dy_valid = dy[i].topRows(len);
    const Tensor2 zero = Tensor2::Zero(len, channels_);
    const Tensor2 negative_grad =
        (x_valid.array() > 0.0).select(zero, dy_valid.cwiseProduct(x_valid));
    slope_->grad.row(0) += negative_grad.colwise().sum();

    const Tensor2 scaled = dy_valid * slope_->value.row(0).asDiagonal();
    dx[i] = Tensor2::Zero(dy[i].rows(), channels_);
    dx[i].topRows(len) = (x_valid.array() > 0.0).select(dy_valid, scaled);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// ResidualBlock

ResidualBlock::ResidualBlock(ParameterStore& store, const std::string& prefix, int channels,
                             int kernel, int convs_per_block) {
  NPASR_CHECK(convs_per_block >= 1, "residual block: need at least one conv unit");
  units_.reserve(static_cast<std::size_t>(convs_per_block));
  for (int u = 0; u < convs_per_block; ++u) {
    const std::string base = prefix + ".unit" + std::to_string(u);
    units_.push_back(Unit{Conv1d(store, base + ".conv", channels, channels, kernel,
                                 /*stride=*/1),
                          BatchNorm1d(store, base + ".bn", channels),
                          PRelu(store, base + ".prelu", channels)});
  }
}

void ResidualBlock::init(std::mt19937_64& rng) {
  for (auto& u : units_) u.conv.init(rng);
}

BatchTensor ResidualBlock::forward(const BatchTensor& x, const std::vector<long>& lengths,
                                   Mode mode) {
  BatchTensor h = x;
  for (auto& u : units_) {
    h = u.conv.forward(h, lengths, mode);
    h = u.bn.forward(h, lengths, mode);
    h = u.act.forward(h, lengths, mode);
  }
  NPASR_CHECK(h.size() == x.size() && h[0].rows() == x[0].rows() &&
                  h[0].cols() == x[0].cols(),
              "residual block: G(x) shape differs from x");
  for (std::size_t i = 0; i < h.size(); ++i) h[i] += x[i];
  return h;
}

BatchTensor ResidualBlock::infer(const BatchTensor& x, const std::vector<long>& lengths) const {
  BatchTensor h = infer_stacked(x, lengths);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] += x[i];
  return h;
}

BatchTensor ResidualBlock::infer_stacked(const BatchTensor& x,
                                         const std::vector<long>& lengths) const {
  BatchTensor h = x;
  for (const auto& u : units_) {
    h = u.conv.infer(h, lengths);
    h = u.bn.infer(h, lengths);
    h = u.act.infer(h, lengths);
  }
  return h;
}

BatchTensor ResidualBlock::backward(const BatchTensor& dy) {
  BatchTensor dh = dy;
  for (auto it = units_.rbegin(); it != units_.rend(); ++it) {
    dh = it->act.backward(dh);
    dh = it->bn.backward(dh);
    dh = it->conv.backward(dh);
  }
  // Skip path: d(G(x) + x) adds the upstream gradient directly.
  for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dy[i];
  return dh;
}

// ---------------------------------------------------------------------------
// LstmDirection

LstmDirection::LstmDirection(ParameterStore& store, const std::string& prefix, int input_dim,
                             int hidden_size, bool reverse)
    : input_dim_(input_dim), hidden_size_(hidden_size), reverse_(reverse) {
  w_input_ = store.create(prefix + ".w_input", 4l * hidden_size, input_dim,
                          {4, static_cast<std::size_t>(hidden_size),
                           static_cast<std::size_t>(input_dim)});
  w_recurrent_ = store.create(prefix + ".w_recurrent", 4l * hidden_size, hidden_size,
                              {4, static_cast<std::size_t>(hidden_size),
                               static_cast<std::size_t>(hidden_size)});
  bias_ = store.create(prefix + ".bias", 4l * hidden_size, 1,
                       {4, static_cast<std::size_t>(hidden_size)});
}

void LstmDirection::init(std::mt19937_64& rng) {
  uniform_init(w_input_->value, std::sqrt(1.0 / input_dim_), rng);
  uniform_init(w_recurrent_->value, std::sqrt(1.0 / hidden_size_), rng);
  bias_->value.setZero();
  // Forget-gate bias 1 keeps early gradients flowing.
  bias_->value.block(hidden_size_, 0, hidden_size_, 1).setOnes();
}

BatchTensor LstmDirection::run(const BatchTensor& x, const std::vector<long>& lengths,
                               std::vector<Cache>* caches) const {
  check_batch(x, lengths);
  const long h_size = hidden_size_;
  BatchTensor y(x.size());
  if (caches != nullptr) caches->assign(x.size(), Cache());

  for (std::size_t n = 0; n < x.size(); ++n) {
    const long len = lengths[n];
    NPASR_CHECK(x[n].cols() == input_dim_, "lstm: input has ", x[n].cols(),
                " channels, expected ", input_dim_);
    Cache c;
    if (caches != nullptr) {
      c.gate_i.resize(h_size, len);
      c.gate_f.resize(h_size, len);
      c.gate_g.resize(h_size, len);
      c.gate_o.resize(h_size, len);
      c.cell.resize(h_size, len);
      c.tanh_cell.resize(h_size, len);
      c.hidden.resize(h_size, len);
    }
    y[n] = Tensor2::Zero(x[n].rows(), h_size);
    Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h_size);
    Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h_size);
    for (long s = 0; s < len; ++s) {
      const long t = time_of_step(s, len);
      const Eigen::VectorXd z = w_input_->value * x[n].row(t).transpose() +
                                w_recurrent_->value * h_prev + bias_->value.col(0);
      const Eigen::VectorXd gi = sigmoid_vec(z.head(h_size));
      const Eigen::VectorXd gf = sigmoid_vec(z.segment(h_size, h_size));
      const Eigen::VectorXd gg = z.segment(2 * h_size, h_size).array().tanh().matrix();
      const Eigen::VectorXd go = sigmoid_vec(z.tail(h_size));
      const Eigen::VectorXd cell =
          (gf.array() * c_prev.array() + gi.array() * gg.array()).matrix();
      const Eigen::VectorXd tc = cell.array().tanh().matrix();
      const Eigen::VectorXd h = (go.array() * tc.array()).matrix();
      y[n].row(t) = h.transpose();
      if (caches != nullptr) {
        c.gate_i.col(s) = gi;
        c.gate_f.col(s) = gf;
        c.gate_g.col(s) = gg;
        c.gate_o.col(s) = go;
        c.cell.col(s) = cell;
        c.tanh_cell.col(s) = tc;
        c.hidden.col(s) = h;
      }
      h_prev = h;
      c_prev = cell;
    }
    if (caches != nullptr) (*caches)[n] = std::move(c);
  }
  return y;
}

BatchTensor LstmDirection::forward(const BatchTensor& x, const std::vector<long>& lengths,
                                   bool keep_cache) {
  if (!keep_cache) {
    has_cache_ = false;
    return run(x, lengths, nullptr);
  }
  BatchTensor y = run(x, lengths, &cache_);
  cached_x_ = x;
  cached_lengths_ = lengths;
  has_cache_ = true;
  return y;
}

BatchTensor LstmDirection::infer(const BatchTensor& x, const std::vector<long>& lengths) const {
  return run(x, lengths, nullptr);
}

BatchTensor LstmDirection::backward(const BatchTensor& dy) {
  NPASR_CHECK(has_cache_, "lstm: backward without cached forward");
  const long h_size = hidden_size_;
  BatchTensor dx(dy.size());
  for (std::size_t n = 0; n < dy.size(); ++n) {
    const long len = cached_lengths_[n];
    const Cache& c = cache_[n];
    dx[n] = Tensor2::Zero(cached_x_[n].rows(), input_dim_);
    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h_size);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h_size);
    Eigen::VectorXd dz(4 * h_size);
    for (long s = len - 1; s >= 0; --s) {
      const long t = time_of_step(s, len);
      const Eigen::ArrayXd gi = c.gate_i.col(s).array();
      const Eigen::ArrayXd gf = c.gate_f.col(s).array();
      const Eigen::ArrayXd gg = c.gate_g.col(s).array();
      const Eigen::ArrayXd go = c.gate_o.col(s).array();
      const Eigen::ArrayXd tc = c.tanh_cell.col(s).array();
      Eigen::ArrayXd c_prev = Eigen::ArrayXd::Zero(h_size);
      Eigen::ArrayXd h_prev = Eigen::ArrayXd::Zero(h_size);
      if (s > 0) {
        c_prev = c.cell.col(s - 1).array();
        h_prev = c.hidden.col(s - 1).array();
      }

      const Eigen::ArrayXd dh = dy[n].row(t).transpose().array() + dh_next.array();
      const Eigen::ArrayXd do_ = dh * tc;
      const Eigen::ArrayXd dc = dc_next.array() + dh * go * (1.0 - tc.square());
      const Eigen::ArrayXd di = dc * gg;
      const Eigen::ArrayXd df = dc * c_prev;
      const Eigen::ArrayXd dg = dc * gi;
      dc_next = (dc * gf).matrix();

      dz.head(h_size) = (di * gi * (1.0 - gi)).matrix();
      dz.segment(h_size, h_size) = (df * gf * (1.0 - gf)).matrix();
      dz.segment(2 * h_size, h_size) = (dg * (1.0 - gg.square())).matrix();
      dz.tail(h_size) = (do_ * go * (1.0 - go)).matrix();

      w_input_->grad.noalias() += dz * cached_x_[n].row(t);
      w_recurrent_->grad.noalias() += dz * h_prev.matrix().transpose();
      bias_->grad.col(0) += dz;
      dx[n].row(t) += (w_input_->value.transpose() * dz).transpose();
      dh_next.noalias() = w_recurrent_->value.transpose() * dz;
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BiLstm

BiLstm::BiLstm(ParameterStore& store, const std::string& prefix, int input_dim,
               int hidden_size)
    : hidden_size_(hidden_size),
      fwd_(store, prefix + ".fwd", input_dim, hidden_size, /*reverse=*/false),
      bwd_(store, prefix + ".bwd", input_dim, hidden_size, /*reverse=*/true) {}

void BiLstm::init(std::mt19937_64& rng) {
  fwd_.init(rng);
  bwd_.init(rng);
}

BatchTensor BiLstm::forward(const BatchTensor& x, const std::vector<long>& lengths, Mode mode,
                            double dropout_rate, std::mt19937_64* rng) {
  const bool train = mode == Mode::kTrain;
  BatchTensor yf = fwd_.forward(x, lengths, train);
  BatchTensor yb = bwd_.forward(x, lengths, train);
  BatchTensor y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = Tensor2::Zero(x[i].rows(), 2l * hidden_size_);
    y[i].leftCols(hidden_size_) = yf[i];
    y[i].rightCols(hidden_size_) = yb[i];
  }

  dropout_active_ = false;
  if (train && dropout_rate > 0.0) {
    NPASR_CHECK(rng != nullptr, "bilstm: train-mode dropout requires an RNG");
    NPASR_CHECK(dropout_rate < 1.0, "bilstm: dropout rate must be < 1");
    const double keep_scale = 1.0 / (1.0 - dropout_rate);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    dropout_mask_.assign(y.size(), Tensor2());
    for (std::size_t i = 0; i < y.size(); ++i) {
      dropout_mask_[i] = Tensor2::Zero(y[i].rows(), y[i].cols());
      for (long r = 0; r < lengths[i]; ++r) {
        for (long col = 0; col < y[i].cols(); ++col) {
          dropout_mask_[i](r, col) = unit(*rng) >= dropout_rate ? keep_scale : 0.0;
        }
      }
      y[i] = y[i].cwiseProduct(dropout_mask_[i]);
    }
    dropout_active_ = true;
  }
  has_cache_ = train;
  return y;
}

BatchTensor BiLstm::infer(const BatchTensor& x, const std::vector<long>& lengths) const {
  BatchTensor yf = fwd_.infer(x, lengths);
  BatchTensor yb = bwd_.infer(x, lengths);
  BatchTensor y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = Tensor2::Zero(x[i].rows(), 2l * hidden_size_);
    y[i].leftCols(hidden_size_) = yf[i];
    y[i].rightCols(hidden_size_) = yb[i];
  }
  return y;
}

BatchTensor BiLstm::backward(const BatchTensor& dy) {
  NPASR_CHECK(has_cache_, "bilstm: backward without cached forward");
  BatchTensor d = dy;
  if (dropout_active_) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = d[i].cwiseProduct(dropout_mask_[i]);
  }
  BatchTensor df(d.size()), db(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    df[i] = d[i].leftCols(hidden_size_);
    db[i] = d[i].rightCols(hidden_size_);
  }
  BatchTensor dxf = fwd_.backward(df);
  BatchTensor dxb = bwd_.backward(db);
  for (std::size_t i = 0; i < dxf.size(); ++i) dxf[i] += dxb[i];
  return dxf;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(ParameterStore& store, const std::string& prefix, int input_dim, int output_dim)
    : input_dim_(input_dim), output_dim_(output_dim) {
  weight_ = store.create(prefix + ".weight", input_dim, output_dim,
                         {static_cast<std::size_t>(input_dim),
                          static_cast<std::size_t>(output_dim)});
  bias_ = store.create(prefix + ".bias", 1, output_dim,
                       {static_cast<std::size_t>(output_dim)});
}

void Dense::init(std::mt19937_64& rng) {
  uniform_init(weight_->value, std::sqrt(1.0 / input_dim_), rng);
  bias_->value.setZero();
}

BatchTensor Dense::apply(const BatchTensor& x, const std::vector<long>& lengths) const {
  BatchTensor y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = Tensor2::Zero(x[i].rows(), output_dim_);
    y[i].topRows(lengths[i]) = x[i].topRows(lengths[i]) * weight_->value;
    y[i].topRows(lengths[i]).rowwise() += bias_->value.row(0);
  }
  return y;
}

BatchTensor Dense::forward(const BatchTensor& x, const std::vector<long>& lengths, Mode mode) {
  check_batch(x, lengths);
  for (const auto& xi : x) {
    NPASR_CHECK(xi.cols() == input_dim_, "dense: input has ", xi.cols(),
                " columns, expected ", input_dim_);
  }
  BatchTensor y = apply(x, lengths);
  if (mode == Mode::kTrain) {
    cached_x_ = x;
    cached_lengths_ = lengths;
    has_cache_ = true;
  } else {
    has_cache_ = false;
  }
  return y;
}

BatchTensor Dense::infer(const BatchTensor& x, const std::vector<long>& lengths) const {
  check_batch(x, lengths);
  return apply(x, lengths);
}

BatchTensor Dense::backward(const BatchTensor& dy) {
  NPASR_CHECK(has_cache_, "dense: backward without cached forward");
  BatchTensor dx(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const long len = cached_lengths_[i];
    weight_->grad.noalias() += cached_x_[i].topRows(len).transpose() * dy[i].topRows(len);
    bias_->grad.row(0) += dy[i].topRows(len).colwise().sum();
    dx[i] = Tensor2::Zero(dy[i].rows(), input_dim_);
    dx[i].topRows(len) = dy[i].topRows(len) * weight_->value.transpose();
  }
  return dx;
}

}  // namespace npasr
