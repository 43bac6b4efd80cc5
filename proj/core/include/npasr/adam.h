// core/include/npasr/adam.h

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

#ifndef NPASR_ADAM_H_
#define NPASR_ADAM_H_

#include <cstdint>

#include "npasr/parameters.h"

namespace npasr {

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  int batch_size = 80;
  int max_epochs = 10;
  std::uint64_t seed = 1234;

  void validate() const;
};

// One Adam update with bias correction over every trainable entry:
//   m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
// step_count is 1-based and global across the run.
void adam_step(ParameterStore& params, const TrainConfig& config, long step_count);

}  // namespace npasr

#endif  // NPASR_ADAM_H_
