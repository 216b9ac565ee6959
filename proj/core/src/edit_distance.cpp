// core/src/edit_distance.cpp

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

#include "isib/edit_distance.hpp"

#include <vector>

namespace isib {

namespace {

// Lexicographic cost cell: (total edits, deletions+insertions, insertions).
// All three accumulate additively, so Bellman composition stays valid.
struct Cell {
  int32_t cost = 0;
  int32_t di = 0;
  int32_t ins = 0;

  bool operator<(const Cell& o) const {
    if (cost != o.cost) return cost < o.cost;
    if (di != o.di) return di < o.di;
    return ins < o.ins;
  }
  Cell plus(int32_t dcost, int32_t ddi, int32_t dins) const {
    return {cost + dcost, di + ddi, ins + dins};
  }
};

}  // namespace

ErrorBreakdown edit_distance(std::span<const int32_t> ref, std::span<const int32_t> hyp) {
  const size_t n = ref.size(), m = hyp.size();
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (size_t j = 1; j <= m; ++j) prev[j] = prev[j - 1].plus(1, 1, 1);

  for (size_t i = 1; i <= n; ++i) {
    cur[0] = prev[0].plus(1, 1, 0);
    for (size_t j = 1; j <= m; ++j) {
      const int32_t neq = ref[i - 1] == hyp[j - 1] ? 0 : 1;
      Cell best = prev[j - 1].plus(neq, 0, 0);   // match / substitution
      const Cell del = prev[j].plus(1, 1, 0);
      if (del < best) best = del;
      const Cell ins = cur[j - 1].plus(1, 1, 1);
      if (ins < best) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }

  const Cell& final_cell = prev[m];
  ErrorBreakdown out;
  out.ref_len = static_cast<int64_t>(n);
  out.insertions = final_cell.ins;
  out.deletions = final_cell.di - final_cell.ins;
  out.substitutions = final_cell.cost - final_cell.di;
  return out;
}

}  // namespace isib
