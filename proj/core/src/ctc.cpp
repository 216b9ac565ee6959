// core/src/ctc.cpp

// Copyright 2026  isibkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "isib/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isib/error.hpp"

namespace isib {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

void validate_labels(const LabelSequence& seq) {
  if (seq.vocab < 1) throw InvalidInputError("label sequence: vocab must be >= 1");
  for (int32_t l : seq.labels)
    if (l < 1 || l > seq.vocab)
      throw InvalidInputError("label sequence: label " + std::to_string(l) +
                              " outside [1, " + std::to_string(seq.vocab) + "]");
}

int64_t ctc_min_frames(const LabelSequence& target) {
  int64_t repeats = 0;
  for (size_t i = 1; i < target.labels.size(); ++i)
    if (target.labels[i] == target.labels[i - 1]) ++repeats;
  return target.length() + repeats;
}

CtcResult ctc_loss(const Tensor& logits, const LabelSequence& target) {
  require_rank(logits, 2, "ctc logits");
  const int64_t t_len = logits.dim(0), c = logits.dim(1);
  if (t_len < 1) throw InvalidInputError("ctc: need at least one frame");
  if (c != static_cast<int64_t>(target.vocab) + 1)
    throw InvalidInputError("ctc: logits width " + std::to_string(c) +
                            " does not match vocab+1 = " + std::to_string(target.vocab + 1));
  validate_labels(target);
  if (!logits.all_finite()) throw NumericError("ctc: non-finite logits");
  if (t_len < ctc_min_frames(target))
    throw InfeasibleTargetError("ctc: target needs " + std::to_string(ctc_min_frames(target)) +
                                " frames, got " + std::to_string(t_len));

  // Per-frame log softmax in double.
  std::vector<double> lp(static_cast<size_t>(t_len * c));
  std::vector<double> prob(static_cast<size_t>(t_len * c));
  for (int64_t t = 0; t < t_len; ++t) {
    const float* row = logits.row(t).data();
    double m = row[0];
    for (int64_t j = 1; j < c; ++j) m = std::max(m, static_cast<double>(row[j]));
    double z = 0.0;
    for (int64_t j = 0; j < c; ++j) z += std::exp(static_cast<double>(row[j]) - m);
    const double logz = std::log(z);
    for (int64_t j = 0; j < c; ++j) {
      const double v = static_cast<double>(row[j]) - m - logz;
      lp[static_cast<size_t>(t * c + j)] = v;
      prob[static_cast<size_t>(t * c + j)] = std::exp(v);
    }
  }

  // Expanded label sequence: blank, y1, blank, y2, ..., yL, blank.
  const int64_t l_len = target.length();
  const int64_t s_len = 2 * l_len + 1;
  std::vector<int32_t> ext(static_cast<size_t>(s_len), 0);
  for (int64_t i = 0; i < l_len; ++i) ext[static_cast<size_t>(2 * i + 1)] = target.labels[static_cast<size_t>(i)];

  auto lp_at = [&](int64_t t, int64_t s) { return lp[static_cast<size_t>(t * c + ext[static_cast<size_t>(s)])]; };
  auto allows_skip = [&](int64_t s) {
    return ext[static_cast<size_t>(s)] != 0 && s >= 2 &&
           ext[static_cast<size_t>(s)] != ext[static_cast<size_t>(s - 2)];
  };

  std::vector<double> alpha(static_cast<size_t>(t_len * s_len), kNegInf);
  std::vector<double> beta(static_cast<size_t>(t_len * s_len), kNegInf);
  auto a_at = [&](int64_t t, int64_t s) -> double& { return alpha[static_cast<size_t>(t * s_len + s)]; };
  auto b_at = [&](int64_t t, int64_t s) -> double& { return beta[static_cast<size_t>(t * s_len + s)]; };

  a_at(0, 0) = lp_at(0, 0);
  if (s_len > 1) a_at(0, 1) = lp_at(0, 1);
  for (int64_t t = 1; t < t_len; ++t) {
    for (int64_t s = 0; s < s_len; ++s) {
      double acc = a_at(t - 1, s);
      if (s >= 1) acc = log_add(acc, a_at(t - 1, s - 1));
      if (allows_skip(s)) acc = log_add(acc, a_at(t - 1, s - 2));
      if (acc != kNegInf) a_at(t, s) = acc + lp_at(t, s);
    }
  }

  double log_z = a_at(t_len - 1, s_len - 1);
  if (s_len > 1) log_z = log_add(log_z, a_at(t_len - 1, s_len - 2));
  if (!std::isfinite(log_z)) throw NumericError("ctc: no alignment has finite probability");

  // beta[t][s] covers emissions strictly after frame t.
  b_at(t_len - 1, s_len - 1) = 0.0;
  if (s_len > 1) b_at(t_len - 1, s_len - 2) = 0.0;
  for (int64_t t = t_len - 2; t >= 0; --t) {
    for (int64_t s = 0; s < s_len; ++s) {
      double acc = b_at(t + 1, s) == kNegInf ? kNegInf : b_at(t + 1, s) + lp_at(t + 1, s);
      if (s + 1 < s_len && b_at(t + 1, s + 1) != kNegInf)
        acc = log_add(acc, b_at(t + 1, s + 1) + lp_at(t + 1, s + 1));
      if (s + 2 < s_len && allows_skip(s + 2) && b_at(t + 1, s + 2) != kNegInf)
        acc = log_add(acc, b_at(t + 1, s + 2) + lp_at(t + 1, s + 2));
      b_at(t, s) = acc;
    }
  }

  // grad(nll)/grad(logit[t][k]) = p[t][k] - q[t][k], with q the posterior
  // probability of emitting k at frame t.
  CtcResult result;
  result.nll = -log_z;
  result.grad_logits = Tensor({t_len, c});
  std::vector<double> q(static_cast<size_t>(c));
  for (int64_t t = 0; t < t_len; ++t) {
    std::fill(q.begin(), q.end(), 0.0);
    for (int64_t s = 0; s < s_len; ++s) {
      const double occ = a_at(t, s) + b_at(t, s);
      if (occ == kNegInf) continue;
      q[static_cast<size_t>(ext[static_cast<size_t>(s)])] += std::exp(occ - log_z);
    }
    float* g = result.grad_logits.row(t).data();
    for (int64_t j = 0; j < c; ++j)
      g[j] = static_cast<float>(prob[static_cast<size_t>(t * c + j)] - q[static_cast<size_t>(j)]);
  }
  return result;
}

std::vector<int32_t> greedy_decode(const Tensor& logits) {
  require_rank(logits, 2, "greedy_decode logits");
  const int64_t t_len = logits.dim(0), c = logits.dim(1);
  std::vector<int32_t> out;
  int32_t prev = 0;
  for (int64_t t = 0; t < t_len; ++t) {
    const float* row = logits.row(t).data();
    int64_t best = 0;
    for (int64_t j = 1; j < c; ++j)
      if (row[j] > row[best]) best = j;
    const int32_t sym = static_cast<int32_t>(best);
    if (sym != 0 && sym != prev) out.push_back(sym);
    prev = sym;
  }
  return out;
}

}  // namespace isib
