// core/src/parameters.cc

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

#include "npasr/parameters.h"

#include <numeric>

#include "npasr/error.h"

namespace npasr {

Parameter* ParameterStore::create(const std::string& name, long rows, long cols,
                                  std::vector<std::size_t> dims, bool trainable) {
  NPASR_CHECK(rows > 0 && cols > 0, "parameter '", name, "': non-positive shape");
  NPASR_CHECK(!by_name_.contains(name), "parameter '", name, "' already exists");
  const std::size_t logical = std::accumulate(dims.begin(), dims.end(),
                                              std::size_t{1}, std::multiplies<>());
  NPASR_CHECK(logical == static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
              "parameter '", name, "': dims do not match storage shape");

  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->dims = std::move(dims);
  p->value = Eigen::MatrixXd::Zero(rows, cols);
  p->grad = Eigen::MatrixXd::Zero(rows, cols);
  p->adam_m = Eigen::MatrixXd::Zero(rows, cols);
  p->adam_v = Eigen::MatrixXd::Zero(rows, cols);
  p->trainable = trainable;

  Parameter* raw = p.get();
  entries_.push_back(std::move(p));
  by_name_.emplace(name, raw);
  return raw;
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

const Parameter* ParameterStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

void ParameterStore::zero_grad() {
  for (auto& p : entries_) p->grad.setZero();
}

std::size_t ParameterStore::trainable_count() const {
  std::size_t total = 0;
  for (const auto& p : entries_) {
    if (p->trainable) total += p->count();
  }
  return total;
}

}  // namespace npasr
