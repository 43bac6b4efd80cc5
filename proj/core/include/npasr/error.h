// core/include/npasr/error.h

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

#ifndef NPASR_ERROR_H_
#define NPASR_ERROR_H_

#include <sstream>
#include <stdexcept>
#include <string>

namespace npasr {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent on-disk data (WAV, manifest, vocabulary,
// feature cache, checkpoint, config file).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// A CTC target that no length-T alignment can collapse to. Kept distinct
// from numeric failures so data bugs surface loudly.
class InfeasibleTargetError : public Error {
 public:
  explicit InfeasibleTargetError(const std::string& msg) : Error(msg) {}
};

namespace detail {
template <typename... Args>
std::string str_cat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}
}  // namespace detail

}  // namespace npasr

#define NPASR_CHECK(cond, ...)                                          \
  do {                                                                  \
    if (!(cond)) {                                                      \
      throw ::npasr::Error(::npasr::detail::str_cat(__VA_ARGS__));      \
    }                                                                   \
  } while (0)

#endif  // NPASR_ERROR_H_
