// core/include/npasr/parameters.h

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

#ifndef NPASR_PARAMETERS_H_
#define NPASR_PARAMETERS_H_

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace npasr {

// One named array of values with its gradient accumulator and Adam moment
// buffers. Storage is a 2-D matrix; `dims` carries the logical shape
// (e.g. {kernel, in_channels, out_channels} for a convolution).
struct Parameter {
  std::string name;
  std::vector<std::size_t> dims;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  Eigen::MatrixXd adam_m;
  Eigen::MatrixXd adam_v;
  // Running statistics and counters live in the store too so checkpoints
  // carry them, but the optimizer and the parameter count skip them.
  bool trainable = true;

  std::size_t count() const { return static_cast<std::size_t>(value.size()); }
};

class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  // Allocates a zero-initialized entry. Throws on duplicate names or when
  // the logical dims do not multiply out to rows*cols.
  Parameter* create(const std::string& name, long rows, long cols,
                    std::vector<std::size_t> dims, bool trainable = true);

  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  const std::vector<std::unique_ptr<Parameter>>& entries() const { return entries_; }

  void zero_grad();
  std::size_t trainable_count() const;

 private:
  std::vector<std::unique_ptr<Parameter>> entries_;
  std::unordered_map<std::string, Parameter*> by_name_;
};

}  // namespace npasr

#endif  // NPASR_PARAMETERS_H_
