// core/src/metrics.cc

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

#include "npasr/metrics.h"

#include <algorithm>
#include <vector>

#include "npasr/unicode.h"

namespace npasr {

long edit_distance(const std::u32string& ref, const std::u32string& hyp) {
  const std::size_t m = ref.size();
  const std::size_t n = hyp.size();
  std::vector<long> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = static_cast<long>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<long>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      const long sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

long edit_distance(std::string_view ref, std::string_view hyp) {
  return edit_distance(decode_utf8(ref), decode_utf8(hyp));
}

double cer(std::string_view ref, std::string_view hyp) {
  return score_pair(ref, hyp).cer;
}

EvalResult score_pair(std::string_view ref, std::string_view hyp) {
  EvalResult r;
  r.reference = std::string(ref);
  r.hypothesis = std::string(hyp);
  const std::u32string ref32 = decode_utf8(ref);
  const std::u32string hyp32 = decode_utf8(hyp);
  r.edits = edit_distance(ref32, hyp32);
  r.empty_reference = ref32.empty();
  const long denom = std::max<long>(1, static_cast<long>(ref32.size()));
  r.cer = static_cast<double>(r.edits) / static_cast<double>(denom);
  return r;
}

}  // namespace npasr
