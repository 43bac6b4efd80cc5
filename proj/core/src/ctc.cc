// core/src/ctc.cc

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

#include "npasr/ctc.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "npasr/error.h"

namespace npasr {

namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log p then extended-target states: [blank, y0, blank, y1, ..., blank].
std::vector<int> extended_target(const std::vector<int>& target, int blank_id) {
  std::vector<int> ext;
  ext.reserve(2 * target.size() + 1);
  ext.push_back(blank_id);
  for (int y : target) {
    ext.push_back(y);
    ext.push_back(blank_id);
  }
  return ext;
}

void check_target(const Eigen::MatrixXd& posteriors, const std::vector<int>& target,
                  int blank_id) {
  const long v = posteriors.cols();
  NPASR_CHECK(blank_id >= 0 && blank_id < v, "ctc: blank id ", blank_id,
              " out of range for ", v, " tokens");
  for (int y : target) {
    NPASR_CHECK(y >= 0 && y < v, "ctc: target id ", y, " out of range for ", v,
                " tokens");
    NPASR_CHECK(y != blank_id, "ctc: target contains the blank id");
  }
  if (!ctc_feasible(posteriors.rows(), target)) {
    throw InfeasibleTargetError(detail::str_cat(
        "ctc: no length-", posteriors.rows(), " alignment collapses to a target of ",
        target.size(), " labels"));
  }
}

// Forward variables alpha[t][s] in log space; alpha includes the emission
// at time t. Returns the full T x S table.
Eigen::MatrixXd ctc_alpha(const Eigen::MatrixXd& log_p, const std::vector<int>& ext) {
  const long t_count = log_p.rows();
  const long s_count = static_cast<long>(ext.size());
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(t_count, s_count, kLogZero);
  alpha(0, 0) = log_p(0, ext[0]);
  if (s_count > 1) alpha(0, 1) = log_p(0, ext[1]);
  for (long t = 1; t < t_count; ++t) {
    for (long s = 0; s < s_count; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_add_exp(a, alpha(t - 1, s - 1));
      if (s >= 2 && ext[s] != ext[s - 2]) {
        // ext[s] != blank is implied: ext alternates blank/label, and
        // ext[s] == ext[s-2] whenever both are blank.
        a = log_add_exp(a, alpha(t - 1, s - 2));
      }
      alpha(t, s) = a + log_p(t, ext[s]);
    }
  }
  return alpha;
}

// Backward variables beta[t][s]: mass of completing paths strictly after
// time t (emission at t excluded). beta[T-1][last two] = 0.
Eigen::MatrixXd ctc_beta(const Eigen::MatrixXd& log_p, const std::vector<int>& ext) {
  const long t_count = log_p.rows();
  const long s_count = static_cast<long>(ext.size());
  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(t_count, s_count, kLogZero);
  beta(t_count - 1, s_count - 1) = 0.0;
  if (s_count > 1) beta(t_count - 1, s_count - 2) = 0.0;
  for (long t = t_count - 2; t >= 0; --t) {
    for (long s = s_count - 1; s >= 0; --s) {
      double b = beta(t + 1, s) + log_p(t + 1, ext[s]);
      if (s + 1 < s_count) {
        b = log_add_exp(b, beta(t + 1, s + 1) + log_p(t + 1, ext[s + 1]));
      }
      if (s + 2 < s_count && ext[s] != ext[s + 2]) {
        b = log_add_exp(b, beta(t + 1, s + 2) + log_p(t + 1, ext[s + 2]));
      }
      beta(t, s) = b;
    }
  }
  return beta;
}

Eigen::MatrixXd safe_log(const Eigen::MatrixXd& posteriors) {
  return posteriors.unaryExpr(
      [](double p) { return p > 0.0 ? std::log(p) : kLogZero; });
}

}  // namespace

double log_add_exp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

std::vector<int> collapse(const std::vector<int>& path, int blank_id) {
  std::vector<int> out;
  int prev = blank_id;
  for (int id : path) {
    if (id != prev && id != blank_id) out.push_back(id);
    prev = id;
  }
  return out;
}

bool ctc_feasible(long frames, const std::vector<int>& target) {
  long repeats = 0;
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++repeats;
  }
  return frames >= static_cast<long>(target.size()) + repeats;
}

double ctc_loss(const Eigen::MatrixXd& posteriors, const std::vector<int>& target,
                int blank_id) {
  NPASR_CHECK(posteriors.rows() >= 1, "ctc: empty posterior matrix");
  check_target(posteriors, target, blank_id);
  const std::vector<int> ext = extended_target(target, blank_id);
  const Eigen::MatrixXd alpha = ctc_alpha(safe_log(posteriors), ext);
  const long t_last = posteriors.rows() - 1;
  const long s_count = static_cast<long>(ext.size());
  double log_total = alpha(t_last, s_count - 1);
  if (s_count > 1) log_total = log_add_exp(log_total, alpha(t_last, s_count - 2));
  return -log_total;
}

Eigen::MatrixXd ctc_grad(const Eigen::MatrixXd& posteriors, const std::vector<int>& target,
                         int blank_id, double* loss_out) {
  NPASR_CHECK(posteriors.rows() >= 1, "ctc: empty posterior matrix");
  check_target(posteriors, target, blank_id);
  const std::vector<int> ext = extended_target(target, blank_id);
  const Eigen::MatrixXd log_p = safe_log(posteriors);
  const Eigen::MatrixXd alpha = ctc_alpha(log_p, ext);
  const Eigen::MatrixXd beta = ctc_beta(log_p, ext);
  const long t_count = posteriors.rows();
  const long s_count = static_cast<long>(ext.size());

  double log_total = alpha(t_count - 1, s_count - 1);
  if (s_count > 1) {
    log_total = log_add_exp(log_total, alpha(t_count - 1, s_count - 2));
  }
  if (loss_out != nullptr) *loss_out = -log_total;

  // d(-log P)/d logit(t, v) = p_t(v) - sum_{s: ext[s]=v} exp(alpha+beta-logP).
  Eigen::MatrixXd grad = posteriors;
  for (long t = 0; t < t_count; ++t) {
    for (long s = 0; s < s_count; ++s) {
      const double g = alpha(t, s) + beta(t, s) - log_total;
      if (g != kLogZero) grad(t, ext[s]) -= std::exp(g);
    }
  }
  return grad;
}

std::vector<int> greedy_decode_ids(const Eigen::MatrixXd& posteriors, int blank_id) {
  std::vector<int> path(static_cast<std::size_t>(posteriors.rows()));
  for (long t = 0; t < posteriors.rows(); ++t) {
    int best = 0;
    for (long v = 1; v < posteriors.cols(); ++v) {
      if (posteriors(t, v) > posteriors(t, best)) best = static_cast<int>(v);
    }
    path[static_cast<std::size_t>(t)] = best;
  }
  return collapse(path, blank_id);
}

std::string greedy_decode(const Eigen::MatrixXd& posteriors, const Vocabulary& vocab) {
  return vocab.decode_ids(greedy_decode_ids(posteriors, vocab.blank_id()));
}

namespace {

struct BeamMass {
  double log_blank = kLogZero;     // mass of alignments ending in blank
  double log_nonblank = kLogZero;  // mass of alignments ending in the last label
  double total() const { return log_add_exp(log_blank, log_nonblank); }
};

// Deterministic order: higher mass first, then shorter prefix, then
// lexicographically smaller ids.
bool beam_better(const std::pair<std::vector<int>, BeamMass>& a,
                 const std::pair<std::vector<int>, BeamMass>& b) {
  const double ta = a.second.total();
  const double tb = b.second.total();
  if (ta != tb) return ta > tb;
  if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
  return a.first < b.first;
}

}  // namespace

std::vector<int> beam_search_decode_ids(const Eigen::MatrixXd& posteriors, int blank_id,
                                        long beam_width) {
  NPASR_CHECK(beam_width >= 1, "beam search: beam_width must be >= 1");
  NPASR_CHECK(blank_id >= 0 && blank_id < posteriors.cols(),
              "beam search: blank id out of range");
  const long t_count = posteriors.rows();
  const long v_count = posteriors.cols();

  std::map<std::vector<int>, BeamMass> beams;
  beams[{}] = BeamMass{0.0, kLogZero};

  for (long t = 0; t < t_count; ++t) {
    std::map<std::vector<int>, BeamMass> next;
    for (const auto& [prefix, mass] : beams) {
      for (long v = 0; v < v_count; ++v) {
        const double lp = posteriors(t, v) > 0.0 ? std::log(posteriors(t, v)) : kLogZero;
        if (lp == kLogZero) continue;
        if (v == blank_id) {
          if (mass.total() == kLogZero) continue;
          BeamMass& m = next[prefix];
          m.log_blank = log_add_exp(m.log_blank, mass.total() + lp);
        } else if (!prefix.empty() && prefix.back() == static_cast<int>(v)) {
          // Repeated label without a separating blank collapses onto the
          // same prefix; with a blank in between it extends it.
          if (mass.log_nonblank != kLogZero) {
            BeamMass& same = next[prefix];
            same.log_nonblank = log_add_exp(same.log_nonblank, mass.log_nonblank + lp);
          }
          if (mass.log_blank != kLogZero) {
            std::vector<int> extended = prefix;
            extended.push_back(static_cast<int>(v));
            BeamMass& ext = next[extended];
            ext.log_nonblank = log_add_exp(ext.log_nonblank, mass.log_blank + lp);
          }
        } else {
          if (mass.total() == kLogZero) continue;
          std::vector<int> extended = prefix;
          extended.push_back(static_cast<int>(v));
          BeamMass& ext = next[extended];
          ext.log_nonblank = log_add_exp(ext.log_nonblank, mass.total() + lp);
        }
      }
    }
    std::vector<std::pair<std::vector<int>, BeamMass>> ranked(next.begin(), next.end());
    std::sort(ranked.begin(), ranked.end(), beam_better);
    if (static_cast<long>(ranked.size()) > beam_width) {
      ranked.resize(static_cast<std::size_t>(beam_width));
    }
    beams.clear();
    for (auto& r : ranked) beams.emplace(std::move(r.first), r.second);
  }

  std::vector<std::pair<std::vector<int>, BeamMass>> final_beams(beams.begin(), beams.end());
  NPASR_CHECK(!final_beams.empty(), "beam search: no surviving hypotheses");
  std::sort(final_beams.begin(), final_beams.end(), beam_better);
  return final_beams.front().first;
}

std::string beam_search_decode(const Eigen::MatrixXd& posteriors, const Vocabulary& vocab,
                               long beam_width) {
  return vocab.decode_ids(beam_search_decode_ids(posteriors, vocab.blank_id(), beam_width));
}

}  // namespace npasr
