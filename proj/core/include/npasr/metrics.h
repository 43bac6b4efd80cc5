// core/include/npasr/metrics.h

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

#ifndef NPASR_METRICS_H_
#define NPASR_METRICS_H_

#include <string>
#include <string_view>

namespace npasr {

struct EvalResult {
  std::string reference;
  std::string hypothesis;
  long edits = 0;
  double cer = 0.0;
  bool empty_reference = false;  // cer used the max(1, len) convention
};

// Levenshtein distance (unit-cost insert/delete/substitute) over Unicode
// scalar values.
long edit_distance(std::string_view ref, std::string_view hyp);
long edit_distance(const std::u32string& ref, const std::u32string& hyp);

// edits / reference length. Empty reference: 0 with an empty hypothesis,
// otherwise edits / 1 (i.e. the hypothesis length), flagged in EvalResult.
double cer(std::string_view ref, std::string_view hyp);

EvalResult score_pair(std::string_view ref, std::string_view hyp);

}  // namespace npasr

#endif  // NPASR_METRICS_H_
