// tests/test_network.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "npasr/ctc.h"
#include "npasr/error.h"
#include "npasr/layers.h"
#include "npasr/model.h"
#include "testutil.h"

using namespace npasr;

namespace {

BatchTensor random_batch(std::mt19937_64& rng, const std::vector<long>& lengths, long rows,
                         long cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  BatchTensor x(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    x[i] = Tensor2::Zero(rows, cols);
    for (long r = 0; r < lengths[i]; ++r) {
      for (long c = 0; c < cols; ++c) x[i](r, c) = gauss(rng);
    }
  }
  return x;
}

double dot_loss(const BatchTensor& y, const BatchTensor& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += y[i].cwiseProduct(g[i]).sum();
  return sum;
}

void randomize_store(ParameterStore& store, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& p : store.entries()) {
    if (!p->trainable) continue;
    for (long c = 0; c < p->value.cols(); ++c) {
      for (long r = 0; r < p->value.rows(); ++r) p->value(r, c) = u(rng);
    }
  }
}

// Central finite differences over every trainable entry against the
// gradients already accumulated in the store.
void check_param_grads(ParameterStore& store, const std::function<double()>& loss_fn,
                       double h = 1e-4) {
  std::vector<Eigen::MatrixXd> analytic;
  for (auto& p : store.entries()) analytic.push_back(p->grad);
  std::size_t idx = 0;
  for (auto& p : store.entries()) {
    const Eigen::MatrixXd& grad = analytic[idx++];
    if (!p->trainable) continue;
    for (long c = 0; c < p->value.cols(); ++c) {
      for (long r = 0; r < p->value.rows(); ++r) {
        const double orig = p->value(r, c);
        p->value(r, c) = orig + h;
        const double lp = loss_fn();
        p->value(r, c) = orig - h;
        const double lm = loss_fn();
        p->value(r, c) = orig;
        const double fd = (lp - lm) / (2.0 * h);
        if (!testutil::grad_close(grad(r, c), fd)) {
          CAPTURE(p->name);
          CAPTURE(r);
          CAPTURE(c);
          CAPTURE(grad(r, c));
          CAPTURE(fd);
          FAIL("parameter gradient mismatch");
        }
      }
    }
  }
}

void check_input_grads(BatchTensor& x, const std::vector<long>& lengths,
                       const BatchTensor& dx, const std::function<double()>& loss_fn,
                       double h = 1e-4) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (long r = 0; r < lengths[i]; ++r) {
      for (long c = 0; c < x[i].cols(); ++c) {
        const double orig = x[i](r, c);
        x[i](r, c) = orig + h;
        const double lp = loss_fn();
        x[i](r, c) = orig - h;
        const double lm = loss_fn();
        x[i](r, c) = orig;
        const double fd = (lp - lm) / (2.0 * h);
        if (!testutil::grad_close(dx[i](r, c), fd)) {
          CAPTURE(i);
          CAPTURE(r);
          CAPTURE(c);
          CAPTURE(dx[i](r, c));
          CAPTURE(fd);
          FAIL("input gradient mismatch");
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Forward-definition cases

TEST_CASE("conv1d with an identity kernel is the identity") {
  ParameterStore store;
  Conv1d conv(store, "c", 3, 3, 1, 1);
  store.find("c.weight")->value = Eigen::MatrixXd::Identity(3, 3);
  std::mt19937_64 rng(1);
  BatchTensor x = random_batch(rng, {5}, 5, 3);
  const BatchTensor y = conv.forward(x, {5}, Mode::kInfer);
  CHECK((y[0] - x[0]).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("conv1d same-padding hand trace") {
  ParameterStore store;
  Conv1d conv(store, "c", 1, 1, 3, 1);
  store.find("c.weight")->value = Eigen::MatrixXd::Ones(3, 1);
  BatchTensor x = {Tensor2(3, 1)};
  x[0] << 1, 2, 3;
  const BatchTensor y = conv.forward(x, {3}, Mode::kInfer);
  CHECK(y[0](0, 0) == doctest::Approx(3.0));
  CHECK(y[0](1, 0) == doctest::Approx(6.0));
  CHECK(y[0](2, 0) == doctest::Approx(5.0));
}

TEST_CASE("conv1d stride halves the length") {
  ParameterStore store;
  Conv1d conv(store, "c", 2, 4, 3, 2);
  std::mt19937_64 rng(2);
  conv.init(rng);
  BatchTensor x = random_batch(rng, {10}, 10, 2);
  const BatchTensor y = conv.forward(x, {10}, Mode::kInfer);
  CHECK(y[0].rows() == 5);
  CHECK(conv.output_lengths({10})[0] == 5);
  CHECK(y[0].cols() == 4);
}

TEST_CASE("batchnorm normalizes in train mode") {
  ParameterStore store;
  BatchNorm1d bn(store, "bn", 3);
  std::mt19937_64 rng(3);
  BatchTensor x = random_batch(rng, {40, 25}, 40, 3);
  for (auto& xi : x) xi.array() += 2.5;  // nonzero mean
  const BatchTensor y = bn.forward(x, {40, 25}, Mode::kTrain);

  // Per-channel statistics over all 65 valid rows.
  for (long c = 0; c < 3; ++c) {
    double sum = 0.0, sq = 0.0;
    sum += y[0].col(c).head(40).sum() + y[1].col(c).head(25).sum();
    const double mean = sum / 65.0;
    sq += (y[0].col(c).head(40).array() - mean).square().sum() +
          (y[1].col(c).head(25).array() - mean).square().sum();
    CHECK(std::abs(mean) <= 1e-10);
    CHECK(std::sqrt(sq / 65.0) == doctest::Approx(1.0).epsilon(1e-4));
  }
  // Padded rows untouched.
  CHECK(y[1].bottomRows(15).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("batchnorm with gamma zero emits beta") {
  ParameterStore store;
  BatchNorm1d bn(store, "bn", 2);
  store.find("bn.gamma")->value.setZero();
  store.find("bn.beta")->value << 0.7, -0.3;
  std::mt19937_64 rng(4);
  BatchTensor x = random_batch(rng, {6}, 6, 2);
  const BatchTensor y = bn.forward(x, {6}, Mode::kTrain);
  for (long r = 0; r < 6; ++r) {
    CHECK(y[0](r, 0) == doctest::Approx(0.7));
    CHECK(y[0](r, 1) == doctest::Approx(-0.3));
  }
}

TEST_CASE("batchnorm with a single distinct value per channel emits beta") {
  ParameterStore store;
  BatchNorm1d bn(store, "bn", 2);
  store.find("bn.beta")->value << 0.2, 0.4;
  BatchTensor x = {Tensor2(5, 2)};
  x[0].col(0).setConstant(3.0);
  x[0].col(1).setConstant(-1.0);
  const BatchTensor y = bn.forward(x, {5}, Mode::kTrain);
  for (long r = 0; r < 5; ++r) {
    CHECK(y[0](r, 0) == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(y[0](r, 1) == doctest::Approx(0.4).epsilon(1e-9));
  }
}

TEST_CASE("batchnorm inference before any training step is an error") {
  ParameterStore store;
  BatchNorm1d bn(store, "bn", 2);
  BatchTensor x = {Tensor2::Zero(4, 2)};
  CHECK_FALSE(bn.has_running_stats());
  CHECK_THROWS_AS(bn.infer(x, {4}), Error);
  bn.forward(x, {4}, Mode::kTrain);
  CHECK(bn.has_running_stats());
  CHECK_NOTHROW(bn.infer(x, {4}));
}

TEST_CASE("prelu definition cases") {
  ParameterStore store;
  PRelu act(store, "p", 2);
  SUBCASE("all-positive input is unchanged") {
    BatchTensor x = {Tensor2(2, 2)};
    x[0] << 1.0, 2.0, 3.0, 0.5;
    const BatchTensor y = act.forward(x, {2}, Mode::kInfer);
    CHECK((y[0] - x[0]).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("slope zero is ReLU") {
    store.find("p.slope")->value.setZero();
    BatchTensor x = {Tensor2(2, 2)};
    x[0] << -1.0, 2.0, 3.0, -0.5;
    const BatchTensor y = act.forward(x, {2}, Mode::kInfer);
    CHECK(y[0](0, 0) == 0.0);
    CHECK(y[0](0, 1) == 2.0);
    CHECK(y[0](1, 1) == 0.0);
  }
  SUBCASE("negative branch scales by the slope") {
    BatchTensor x = {Tensor2(1, 2)};
    x[0] << -2.0, -4.0;
    const BatchTensor y = act.forward(x, {1}, Mode::kInfer);
    CHECK(y[0](0, 0) == doctest::Approx(-0.5));
    CHECK(y[0](0, 1) == doctest::Approx(-1.0));
  }
}

TEST_CASE("residual block with zero conv weights is the identity") {
  ParameterStore store;
  ResidualBlock block(store, "b", 3, 3, 2);
  // Conv weights and biases default to zero; beta is zero, so G(x) = 0.
  std::mt19937_64 rng(5);
  BatchTensor x = random_batch(rng, {7}, 7, 3);
  const BatchTensor y = block.forward(x, {7}, Mode::kTrain);
  CHECK((y[0] - x[0]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("residual block preserves shape and equals stacked layers plus input") {
  std::mt19937_64 rng(6);
  ParameterStore store_a;
  ResidualBlock block(store_a, "b", 3, 3, 2);
  randomize_store(store_a, rng);

  // Twin chain reading copied parameter values.
  ParameterStore store_b;
  Conv1d c0(store_b, "u0.conv", 3, 3, 3, 1);
  BatchNorm1d n0(store_b, "u0.bn", 3);
  PRelu a0(store_b, "u0.prelu", 3);
  Conv1d c1(store_b, "u1.conv", 3, 3, 3, 1);
  BatchNorm1d n1(store_b, "u1.bn", 3);
  PRelu a1(store_b, "u1.prelu", 3);
  REQUIRE(store_a.entries().size() == store_b.entries().size());
  for (std::size_t i = 0; i < store_a.entries().size(); ++i) {
    store_b.entries()[i]->value = store_a.entries()[i]->value;
  }

  BatchTensor x = random_batch(rng, {9}, 9, 3);
  const std::vector<long> lens = {9};
  const BatchTensor y = block.forward(x, lens, Mode::kTrain);
  CHECK(y[0].rows() == x[0].rows());
  CHECK(y[0].cols() == x[0].cols());

  BatchTensor g = c0.forward(x, lens, Mode::kTrain);
  g = n0.forward(g, lens, Mode::kTrain);
  g = a0.forward(g, lens, Mode::kTrain);
  g = c1.forward(g, lens, Mode::kTrain);
  g = n1.forward(g, lens, Mode::kTrain);
  g = a1.forward(g, lens, Mode::kTrain);
  CHECK((y[0] - (g[0] + x[0])).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("lstm_step closed forms") {
  const int h = 3, in = 2;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4 * h, in);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(4 * h, h);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(4 * h);

  SUBCASE("all-zero parameters halve the cell state") {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(in, 0.3);
    Eigen::VectorXd h_prev = Eigen::VectorXd::Constant(h, 0.5);
    Eigen::VectorXd c_prev(h);
    c_prev << 1.0, -2.0, 0.25;
    const LstmStepResult r = lstm_step(x, h_prev, c_prev, w, u, b);
    for (int i = 0; i < h; ++i) {
      CHECK(r.c(i) == doctest::Approx(0.5 * c_prev(i)).epsilon(1e-12));
      CHECK(r.h(i) == doctest::Approx(0.5 * std::tanh(0.5 * c_prev(i))).epsilon(1e-12));
    }
  }
  SUBCASE("zero everything gives zero hidden state") {
    const LstmStepResult r = lstm_step(Eigen::VectorXd::Zero(in), Eigen::VectorXd::Zero(h),
                                       Eigen::VectorXd::Zero(h), w, u, b);
    CHECK(r.h.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("saturated forget gate carries the cell state") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> small(-0.3, 0.3);
    for (long c = 0; c < w.cols(); ++c) {
      for (long r = 0; r < w.rows(); ++r) w(r, c) = small(rng);
    }
    for (long c = 0; c < u.cols(); ++c) {
      for (long r = 0; r < u.rows(); ++r) u(r, c) = small(rng);
    }
    for (long r = 0; r < b.size(); ++r) b(r) = small(rng);
    b.segment(h, h).setConstant(50.0);  // forget-gate block

    Eigen::VectorXd x = Eigen::VectorXd::Constant(in, 0.4);
    Eigen::VectorXd h_prev = Eigen::VectorXd::Constant(h, -0.2);
    Eigen::VectorXd c_prev(h);
    c_prev << 0.7, -0.3, 1.1;
    const LstmStepResult r = lstm_step(x, h_prev, c_prev, w, u, b);

    // Recompute i and g to form the saturation limit c_prev + i*g.
    const Eigen::VectorXd z = w * x + u * h_prev + b;
    for (int i = 0; i < h; ++i) {
      const double gi = 1.0 / (1.0 + std::exp(-z(i)));
      const double gg = std::tanh(z(2 * h + i));
      CHECK(r.c(i) == doctest::Approx(c_prev(i) + gi * gg).epsilon(1e-9));
    }
  }
}

TEST_CASE("bilstm output width and inference dropout equivalence") {
  ParameterStore store;
  BiLstm layer(store, "l", 3, 4);
  std::mt19937_64 rng(8);
  layer.init(rng);
  BatchTensor x = random_batch(rng, {6}, 6, 3);
  const BatchTensor y = layer.forward(x, {6}, Mode::kInfer, 0.25, nullptr);
  CHECK(y[0].cols() == 8);
  const BatchTensor y0 = layer.forward(x, {6}, Mode::kInfer, 0.0, nullptr);
  CHECK((y[0] - y0[0]).cwiseAbs().maxCoeff() == 0.0);
  const BatchTensor yc = layer.infer(x, {6});
  CHECK((y[0] - yc[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bilstm time reversal with swapped directions") {
  std::mt19937_64 rng(9);
  ParameterStore sa;
  BiLstm a(sa, "l", 3, 4);
  a.init(rng);
  ParameterStore sb;
  BiLstm b(sb, "l", 3, 4);
  // Entry order per direction: w_input, w_recurrent, bias; fwd then bwd.
  for (int k = 0; k < 3; ++k) {
    sb.entries()[static_cast<std::size_t>(k)]->value =
        sa.entries()[static_cast<std::size_t>(k + 3)]->value;
    sb.entries()[static_cast<std::size_t>(k + 3)]->value =
        sa.entries()[static_cast<std::size_t>(k)]->value;
  }

  const long t_len = 7;
  BatchTensor x = random_batch(rng, {t_len}, t_len, 3);
  BatchTensor xr = {x[0].colwise().reverse().eval()};

  const BatchTensor ya = a.forward(x, {t_len}, Mode::kInfer, 0.0, nullptr);
  const BatchTensor yb = b.forward(xr, {t_len}, Mode::kInfer, 0.0, nullptr);

  for (long t = 0; t < t_len; ++t) {
    for (int c = 0; c < 4; ++c) {
      CHECK(yb[0](t_len - 1 - t, c) == doctest::Approx(ya[0](t, c + 4)).epsilon(1e-12));
      CHECK(yb[0](t_len - 1 - t, c + 4) == doctest::Approx(ya[0](t, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("softmax rows behave") {
  SUBCASE("rows sum to one") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> gauss(0.0, 3.0);
    Eigen::MatrixXd logits(5, 7);
    for (long r = 0; r < 5; ++r) {
      for (long c = 0; c < 7; ++c) logits(r, c) = gauss(rng);
    }
    const Eigen::MatrixXd p = softmax_rows(logits);
    for (long r = 0; r < 5; ++r) {
      CHECK(p.row(r).sum() == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(p.row(r).minCoeff() > 0.0);
    }
  }
  SUBCASE("zero logits give uniform rows") {
    const Eigen::MatrixXd p = softmax_rows(Eigen::MatrixXd::Zero(3, 4));
    CHECK((p.array() - 0.25).abs().maxCoeff() <= 1e-15);
  }
  SUBCASE("adding a constant per row changes nothing") {
    Eigen::MatrixXd logits(2, 3);
    logits << 1.0, -2.0, 0.5, 3.0, 3.0, -1.0;
    Eigen::MatrixXd shifted = logits;
    shifted.array() += 11.5;
    CHECK((softmax_rows(logits) - softmax_rows(shifted)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Gradient checks (finite differences, double precision)

TEST_CASE("conv1d gradients match finite differences") {
  std::mt19937_64 rng(20);
  ParameterStore store;
  Conv1d conv(store, "c", 3, 4, 3, 1);
  randomize_store(store, rng);
  const std::vector<long> lens = {7, 5};
  BatchTensor x = random_batch(rng, lens, 7, 3);
  BatchTensor g = random_batch(rng, lens, 7, 4);

  auto loss_fn = [&] { return dot_loss(conv.forward(x, lens, Mode::kTrain), g); };
  loss_fn();
  store.zero_grad();
  const BatchTensor dx = conv.backward(g);
  check_param_grads(store, loss_fn);
  check_input_grads(x, lens, dx, loss_fn);
}

TEST_CASE("strided conv1d gradients match finite differences") {
  std::mt19937_64 rng(21);
  ParameterStore store;
  Conv1d conv(store, "c", 2, 3, 3, 2);
  randomize_store(store, rng);
  const std::vector<long> lens = {8, 5};
  BatchTensor x = random_batch(rng, lens, 8, 2);
  BatchTensor g = random_batch(rng, conv.output_lengths(lens), 4, 3);

  auto loss_fn = [&] { return dot_loss(conv.forward(x, lens, Mode::kTrain), g); };
  loss_fn();
  store.zero_grad();
  const BatchTensor dx = conv.backward(g);
  check_param_grads(store, loss_fn);
  check_input_grads(x, lens, dx, loss_fn);
}

TEST_CASE("batchnorm gradients match finite differences") {
  std::mt19937_64 rng(22);
  ParameterStore store;
  BatchNorm1d bn(store, "bn", 3);
  store.find("bn.gamma")->value << 1.3, 0.7, -0.5;
  store.find("bn.beta")->value << 0.1, -0.2, 0.05;
  const std::vector<long> lens = {6, 4};
  BatchTensor x = random_batch(rng, lens, 6, 3);
  BatchTensor g = random_batch(rng, lens, 6, 3);

  auto loss_fn = [&] { return dot_loss(bn.forward(x, lens, Mode::kTrain), g); };
  loss_fn();
  store.zero_grad();
  const BatchTensor dx = bn.backward(g);
  check_param_grads(store, loss_fn);
  check_input_grads(x, lens, dx, loss_fn);
}

TEST_CASE("prelu gradients match finite differences") {
  std::mt19937_64 rng(23);
  ParameterStore store;
  PRelu act(store, "p", 3);
  const std::vector<long> lens = {6};
  BatchTensor x = random_batch(rng, lens, 6, 3);
  // Keep entries away from the kink so finite differences are valid.
  for (long r = 0; r < 6; ++r) {
    for (long c = 0; c < 3; ++c) {
      if (std::abs(x[0](r, c)) < 0.05) x[0](r, c) = 0.1;
    }
  }
  BatchTensor g = random_batch(rng, lens, 6, 3);

  auto loss_fn = [&] { return dot_loss(act.forward(x, lens, Mode::kTrain), g); };
  loss_fn();
  store.zero_grad();
  const BatchTensor dx = act.backward(g);
  check_param_grads(store, loss_fn);
  check_input_grads(x, lens, dx, loss_fn);
}

TEST_CASE("residual block gradients match finite differences") {
  std::mt19937_64 rng(24);
  ParameterStore store;
  ResidualBlock block(store, "b", 3, 3, 2);
  randomize_store(store, rng);
  const std::vector<long> lens = {6, 4};
  BatchTensor x = random_batch(rng, lens, 6, 3);
  BatchTensor g = random_batch(rng, lens, 6, 3);

  auto loss_fn = [&] { return dot_loss(block.forward(x, lens, Mode::kTrain), g); };
  loss_fn();
  store.zero_grad();
  const BatchTensor dx = block.backward(g);
  check_param_grads(store, loss_fn);
  check_input_grads(x, lens, dx, loss_fn);
}

TEST_CASE("lstm direction gradients match finite differences") {
  std::mt19937_64 rng(25);
  for (bool reverse : {false, true}) {
    CAPTURE(reverse);
    ParameterStore store;
    LstmDirection lstm(store, "l", 3, 4, reverse);
    randomize_store(store, rng);
    const std::vector<long> lens = {6, 4};
    BatchTensor x = random_batch(rng, lens, 6, 3);
    BatchTensor g = random_batch(rng, lens, 6, 4);

    auto loss_fn = [&] { return dot_loss(lstm.forward(x, lens, true), g); };
    loss_fn();
    store.zero_grad();
    const BatchTensor dx = lstm.backward(g);
    check_param_grads(store, loss_fn);
    check_input_grads(x, lens, dx, loss_fn);
  }
}

TEST_CASE("bilstm gradients match finite differences") {
  std::mt19937_64 rng(26);
  ParameterStore store;
  BiLstm layer(store, "l", 3, 3);
  randomize_store(store, rng);
  const std::vector<long> lens = {5, 4};
  BatchTensor x = random_batch(rng, lens, 5, 3);
  BatchTensor g = random_batch(rng, lens, 5, 6);

  SUBCASE("without dropout") {
    auto loss_fn = [&] {
      return dot_loss(layer.forward(x, lens, Mode::kTrain, 0.0, nullptr), g);
    };
    loss_fn();
    store.zero_grad();
    const BatchTensor dx = layer.backward(g);
    check_param_grads(store, loss_fn);
    check_input_grads(x, lens, dx, loss_fn);
  }
  SUBCASE("with a fixed dropout mask") {
    std::mt19937_64 dropout_rng(777);
    auto loss_fn = [&] {
      dropout_rng.seed(777);
      return dot_loss(layer.forward(x, lens, Mode::kTrain, 0.25, &dropout_rng), g);
    };
    loss_fn();
    store.zero_grad();
    const BatchTensor dx = layer.backward(g);
    check_param_grads(store, loss_fn);
    check_input_grads(x, lens, dx, loss_fn);
  }
}

TEST_CASE("dense gradients match finite differences") {
  std::mt19937_64 rng(27);
  ParameterStore store;
  Dense dense(store, "d", 4, 5);
  randomize_store(store, rng);
  const std::vector<long> lens = {6, 3};
  BatchTensor x = random_batch(rng, lens, 6, 4);
  BatchTensor g = random_batch(rng, lens, 6, 5);

  auto loss_fn = [&] { return dot_loss(dense.forward(x, lens, Mode::kTrain), g); };
  loss_fn();
  store.zero_grad();
  const BatchTensor dx = dense.backward(g);
  check_param_grads(store, loss_fn);
  check_input_grads(x, lens, dx, loss_fn);
}

TEST_CASE("backward without a cached forward is an error") {
  ParameterStore store;
  Conv1d conv(store, "c", 2, 2, 3, 1);
  BatchTensor g = {Tensor2::Zero(4, 2)};
  CHECK_THROWS_AS(conv.backward(g), Error);

  std::mt19937_64 rng(1);
  BatchTensor x = random_batch(rng, {4}, 4, 2);
  conv.forward(x, {4}, Mode::kInfer);  // infer forward does not cache
  CHECK_THROWS_AS(conv.backward(g), Error);
}

// ---------------------------------------------------------------------------
// Model-level behavior

namespace {

NetworkConfig tiny_config() {
  NetworkConfig cfg;
  cfg.input_dim = 6;
  cfg.conv_channels = 3;
  cfg.kernel_size = 3;
  cfg.stride = 1;
  cfg.residual_blocks = 2;
  cfg.convs_per_block = 2;
  cfg.bilstm_layers = 2;
  cfg.hidden_size = 4;
  cfg.dropout_rate = 0.0;
  cfg.vocab_size = 5;
  return cfg;
}

}  // namespace

TEST_CASE("model forward emits row-normalized posteriors of width vocab_size") {
  NetworkConfig cfg;  // defaults: 52 -> 66
  Model model(cfg, 42);
  std::mt19937_64 rng(30);
  BatchTensor x = random_batch(rng, {23}, 23, 52);
  const BatchTensor p = model.forward(x, {23}, Mode::kTrain);
  REQUIRE(p.size() == 1);
  CHECK(p[0].rows() == 23);
  CHECK(p[0].cols() == 66);
  for (long r = 0; r < 23; ++r) {
    CHECK(p[0].row(r).sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p[0].row(r).minCoeff() > 0.0);
    CHECK(p[0].row(r).maxCoeff() < 1.0);
  }
}

TEST_CASE("model inference is bit-deterministic") {
  Model model(tiny_config(), 7);
  std::mt19937_64 rng(31);
  BatchTensor x = random_batch(rng, {11}, 11, 6);
  model.forward(x, {11}, Mode::kTrain);  // sets batchnorm running stats
  const BatchTensor a = model.infer(x, {11});
  const BatchTensor b = model.infer(x, {11});
  CHECK((a[0].array() == b[0].array()).all());
}

TEST_CASE("train-mode forward is deterministic under a fixed dropout seed") {
  NetworkConfig cfg = tiny_config();
  cfg.dropout_rate = 0.25;
  Model model(cfg, 7);
  std::mt19937_64 rng(32);
  BatchTensor x = random_batch(rng, {9}, 9, 6);
  model.seed_dropout(99);
  const BatchTensor a = model.forward(x, {9}, Mode::kTrain);
  model.seed_dropout(99);
  const BatchTensor b = model.forward(x, {9}, Mode::kTrain);
  CHECK((a[0].array() == b[0].array()).all());
  model.seed_dropout(100);
  const BatchTensor c = model.forward(x, {9}, Mode::kTrain);
  CHECK((a[0] - c[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("model backward requires a train-mode forward") {
  Model model(tiny_config(), 7);
  std::mt19937_64 rng(33);
  BatchTensor x = random_batch(rng, {5}, 5, 6);
  BatchTensor g = {Tensor2::Zero(5, 5)};
  CHECK_THROWS_AS(model.backward(g), Error);
  model.forward(x, {5}, Mode::kTrain);
  CHECK_NOTHROW(model.backward(g));
}

TEST_CASE("zero upstream gradient produces zero parameter gradients") {
  Model model(tiny_config(), 7);
  std::mt19937_64 rng(34);
  BatchTensor x = random_batch(rng, {6}, 6, 6);
  model.forward(x, {6}, Mode::kTrain);
  model.params().zero_grad();
  model.backward({Tensor2::Zero(6, 5)});
  for (const auto& p : model.params().entries()) {
    CHECK(p->grad.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("model gradients match finite differences through the CTC loss") {
  // T=7, conv_channels=3, hidden=4, V=5 per the tiny-instance contract.
  NetworkConfig cfg = tiny_config();
  cfg.residual_blocks = 1;
  Model model(cfg, 11);
  std::mt19937_64 rng(35);
  BatchTensor x = random_batch(rng, {7}, 7, 6);
  const std::vector<int> target = {1, 2};
  const int blank = cfg.vocab_size - 1;

  auto loss_fn = [&] {
    const BatchTensor p = model.forward(x, {7}, Mode::kTrain);
    return ctc_loss(p[0], target, blank);
  };

  const BatchTensor p = model.forward(x, {7}, Mode::kTrain);
  const Eigen::MatrixXd dlogits = ctc_grad(p[0], target, blank);
  model.params().zero_grad();
  model.backward({dlogits});
  check_param_grads(model.params(), loss_fn);
}

TEST_CASE("count_params lands on the published budget") {
  NetworkConfig cfg;
  const std::size_t n = count_params(cfg);
  CHECK(static_cast<double>(n) >= 0.95 * 1550000.0);
  CHECK(static_cast<double>(n) <= 1.05 * 1550000.0);
}

TEST_CASE("count_params arithmetic identities") {
  NetworkConfig cfg;
  SUBCASE("one more vocabulary entry adds a dense row and bias") {
    NetworkConfig plus = cfg;
    plus.vocab_size += 1;
    CHECK(count_params(plus) - count_params(cfg) ==
          static_cast<std::size_t>(2 * cfg.hidden_size + 1));
  }
  SUBCASE("zero residual blocks leaves conv + bilstm + dense") {
    NetworkConfig no_blocks = cfg;
    no_blocks.residual_blocks = 0;
    const std::size_t conv = static_cast<std::size_t>(
        cfg.kernel_size * cfg.input_dim * cfg.conv_channels + cfg.conv_channels);
    std::size_t lstm = 0;
    int in_dim = cfg.conv_channels;
    for (int l = 0; l < cfg.bilstm_layers; ++l) {
      lstm += 2ull * (4ull * cfg.hidden_size * (in_dim + cfg.hidden_size + 1));
      in_dim = 2 * cfg.hidden_size;
    }
    const std::size_t dense =
        static_cast<std::size_t>(2 * cfg.hidden_size * cfg.vocab_size + cfg.vocab_size);
    CHECK(count_params(no_blocks) == conv + lstm + dense);
  }
}

TEST_CASE("model rejects mismatched feature width") {
  Model model(tiny_config(), 3);
  BatchTensor x = {Tensor2::Zero(5, 9)};
  CHECK_THROWS_AS(model.forward(x, {5}, Mode::kTrain), Error);
}
