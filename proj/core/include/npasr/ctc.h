// core/include/npasr/ctc.h

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

#ifndef NPASR_CTC_H_
#define NPASR_CTC_H_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "npasr/vocab.h"

namespace npasr {

// log(exp(a) + exp(b)) with -inf as the zero element.
double log_add_exp(double a, double b);

// Merge consecutive equal tokens, then delete blanks.
std::vector<int> collapse(const std::vector<int>& path, int blank_id);

// True when a length-`frames` alignment collapsing to `target` exists:
// frames >= |target| + (count of adjacent equal pairs).
bool ctc_feasible(long frames, const std::vector<int>& target);

// Negative log of the total probability over all alignments that collapse
// to `target` (forward recursion over the blank-interleaved extended
// target, in log space). `posteriors` is T x V with rows summing to 1.
// Throws InfeasibleTargetError when no valid alignment exists.
double ctc_loss(const Eigen::MatrixXd& posteriors, const std::vector<int>& target,
                int blank_id);

// Gradient of ctc_loss with respect to pre-softmax logits:
// posteriors minus the per-frame alignment-posterior marginals.
// Optionally reports the loss through `loss_out`.
Eigen::MatrixXd ctc_grad(const Eigen::MatrixXd& posteriors, const std::vector<int>& target,
                         int blank_id, double* loss_out = nullptr);

// Per-row argmax (ties to the lowest token id), collapsed.
std::vector<int> greedy_decode_ids(const Eigen::MatrixXd& posteriors, int blank_id);
std::string greedy_decode(const Eigen::MatrixXd& posteriors, const Vocabulary& vocab);

// Prefix beam search: per-prefix blank/non-blank log masses, every token
// considered at each step, identical prefixes merged by log-sum-exp, the
// beam_width best kept by total mass. Ties break toward the shorter
// prefix, then lexicographically smaller token ids.
std::vector<int> beam_search_decode_ids(const Eigen::MatrixXd& posteriors, int blank_id,
                                        long beam_width);
std::string beam_search_decode(const Eigen::MatrixXd& posteriors, const Vocabulary& vocab,
                               long beam_width);

}  // namespace npasr

#endif  // NPASR_CTC_H_
