// tests/oracles.hpp

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

// Independent reference implementations used as test oracles. Nothing here
// shares code with the library paths it checks: probabilities are recomputed
// from raw logits, alignments are enumerated instead of recursed, clusterings
// are brute-forced over all partitions.

#ifndef ISIBKIT_TESTS_ORACLES_HPP_
#define ISIBKIT_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "isib/edit_distance.hpp"
#include "isib/tensor.hpp"

namespace isib::test {

// Sums the probability of every frame-label path that collapses to the
// target (remove repeats, drop blanks), directly in probability space.
inline double ctc_enumerate_nll(const Tensor& logits, const std::vector<int32_t>& target) {
  const int64_t t_len = logits.dim(0), c = logits.dim(1);

  std::vector<double> prob(static_cast<size_t>(t_len * c));
  for (int64_t t = 0; t < t_len; ++t) {
    double m = logits.at(t, 0);
    for (int64_t j = 1; j < c; ++j) m = std::max(m, static_cast<double>(logits.at(t, j)));
    double z = 0.0;
    for (int64_t j = 0; j < c; ++j) z += std::exp(static_cast<double>(logits.at(t, j)) - m);
    for (int64_t j = 0; j < c; ++j)
      prob[static_cast<size_t>(t * c + j)] =
          std::exp(static_cast<double>(logits.at(t, j)) - m) / z;
  }

  double total = 0.0;
  std::vector<int64_t> path(static_cast<size_t>(t_len), 0);
  for (;;) {
    // Collapse the path and compare with the target.
    std::vector<int32_t> collapsed;
    int64_t prev = -1;
    for (int64_t t = 0; t < t_len; ++t) {
      const int64_t sym = path[static_cast<size_t>(t)];
      if (sym != 0 && sym != prev) collapsed.push_back(static_cast<int32_t>(sym));
      prev = sym;
    }
    if (static_cast<int64_t>(collapsed.size()) == static_cast<int64_t>(target.size()) &&
        std::equal(collapsed.begin(), collapsed.end(), target.begin())) {
      double p = 1.0;
      for (int64_t t = 0; t < t_len; ++t)
        p *= prob[static_cast<size_t>(t * c + path[static_cast<size_t>(t)])];
      total += p;
    }
    // Odometer increment over the c^T paths.
    int64_t pos = t_len - 1;
    while (pos >= 0) {
      if (++path[static_cast<size_t>(pos)] < c) break;
      path[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return -std::log(total);
}

// Independent collapse rule for greedy decoding: two passes instead of the
// single streaming pass used in the library.
inline std::vector<int32_t> greedy_reference(const Tensor& logits) {
  std::vector<int32_t> argmaxes;
  for (int64_t t = 0; t < logits.dim(0); ++t) {
    int64_t best = 0;
    for (int64_t j = 1; j < logits.dim(1); ++j)
      if (logits.at(t, j) > logits.at(t, best)) best = j;
    argmaxes.push_back(static_cast<int32_t>(best));
  }
  std::vector<int32_t> deduped;
  for (size_t i = 0; i < argmaxes.size(); ++i)
    if (i == 0 || argmaxes[i] != argmaxes[i - 1]) deduped.push_back(argmaxes[i]);
  std::vector<int32_t> out;
  for (int32_t v : deduped)
    if (v != 0) out.push_back(v);
  return out;
}

// Enumerates every alignment of ref against hyp and keeps the lexicographic
// minimum of (edits, deletions+insertions, insertions), mirroring the
// library's stated tie rule.
inline ErrorBreakdown alignment_enumerate(std::span<const int32_t> ref,
                                          std::span<const int32_t> hyp) {
  using Key = std::tuple<int64_t, int64_t, int64_t>;  // (cost, d+i, i)
  Key best{INT64_MAX, INT64_MAX, INT64_MAX};
  ErrorBreakdown best_counts;

  struct Frame {
    size_t i, j;
    int64_t s, d, ins;
  };
  std::vector<Frame> stack{{0, 0, 0, 0, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.i == ref.size() && f.j == hyp.size()) {
      const Key key{f.s + f.d + f.ins, f.d + f.ins, f.ins};
      if (key < best) {
        best = key;
        best_counts = {f.s, f.d, f.ins, static_cast<int64_t>(ref.size())};
      }
      continue;
    }
    if (f.i < ref.size() && f.j < hyp.size())
      stack.push_back({f.i + 1, f.j + 1, f.s + (ref[f.i] == hyp[f.j] ? 0 : 1), f.d, f.ins});
    if (f.i < ref.size()) stack.push_back({f.i + 1, f.j, f.s, f.d + 1, f.ins});
    if (f.j < hyp.size()) stack.push_back({f.i, f.j + 1, f.s, f.d, f.ins + 1});
  }
  return best_counts;
}

// Best clustering of n points into k groups by exhaustive assignment search;
// returns the minimal total squared distance to group means.
inline double kmeans_brute_force(const Tensor& points, int64_t k) {
  const int64_t n = points.dim(0), d = points.dim(1);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int64_t> assign(static_cast<size_t>(n), 0);
  const int64_t combos = static_cast<int64_t>(std::pow(static_cast<double>(k), static_cast<double>(n)));
  for (int64_t code = 0; code < combos; ++code) {
    int64_t rest = code;
    for (int64_t i = 0; i < n; ++i) {
      assign[static_cast<size_t>(i)] = rest % k;
      rest /= k;
    }
    std::vector<double> sums(static_cast<size_t>(k * d), 0.0);
    std::vector<int64_t> counts(static_cast<size_t>(k), 0);
    for (int64_t i = 0; i < n; ++i) {
      counts[static_cast<size_t>(assign[static_cast<size_t>(i)])]++;
      for (int64_t c = 0; c < d; ++c)
        sums[static_cast<size_t>(assign[static_cast<size_t>(i)] * d + c)] += points.at(i, c);
    }
    bool any_empty = false;
    for (int64_t g = 0; g < k; ++g)
      if (counts[static_cast<size_t>(g)] == 0) any_empty = true;
    if (any_empty) continue;
    double inertia = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      const int64_t g = assign[static_cast<size_t>(i)];
      for (int64_t c = 0; c < d; ++c) {
        const double mean = sums[static_cast<size_t>(g * d + c)] /
                            static_cast<double>(counts[static_cast<size_t>(g)]);
        const double diff = points.at(i, c) - mean;
        inertia += diff * diff;
      }
    }
    best = std::min(best, inertia);
  }
  return best;
}

}  // namespace isib::test

#endif  // ISIBKIT_TESTS_ORACLES_HPP_
