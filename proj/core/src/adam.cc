// core/src/adam.cc

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

#include "npasr/adam.h"

#include <cmath>

#include "npasr/error.h"

namespace npasr {

void TrainConfig::validate() const {
  NPASR_CHECK(learning_rate > 0.0, "train: learning_rate must be positive");
  NPASR_CHECK(beta1 >= 0.0 && beta1 < 1.0, "train: need 0 <= beta1 < 1");
  NPASR_CHECK(beta2 >= 0.0 && beta2 < 1.0, "train: need 0 <= beta2 < 1");
  NPASR_CHECK(epsilon > 0.0, "train: epsilon must be positive");
  NPASR_CHECK(weight_decay >= 0.0, "train: weight_decay must be >= 0");
  NPASR_CHECK(batch_size >= 1, "train: batch_size must be >= 1");
}

void adam_step(ParameterStore& params, const TrainConfig& config, long step_count) {
  NPASR_CHECK(step_count >= 1, "adam_step: step_count must be >= 1");
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(step_count));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(step_count));
  for (auto& p : params.entries()) {
    if (!p->trainable) continue;
    Eigen::MatrixXd grad = p->grad;
    if (config.weight_decay > 0.0) grad += config.weight_decay * p->value;
    p->adam_m = config.beta1 * p->adam_m + (1.0 - config.beta1) * grad;
    p->adam_v = config.beta2 * p->adam_v.array().matrix() +
                (1.0 - config.beta2) * grad.array().square().matrix();
    const Eigen::ArrayXXd m_hat = p->adam_m.array() / bias1;
    const Eigen::ArrayXXd v_hat = p->adam_v.array() / bias2;
    p->value.array() -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
  }
}

}  // namespace npasr
