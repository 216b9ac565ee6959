// core/include/isib/edit_distance.hpp

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

#ifndef ISIB_EDIT_DISTANCE_HPP_
#define ISIB_EDIT_DISTANCE_HPP_

#include <cstdint>
#include <span>

namespace isib {

struct ErrorBreakdown {
  int64_t substitutions = 0;
  int64_t deletions = 0;
  int64_t insertions = 0;
  int64_t ref_len = 0;

  int64_t errors() const { return substitutions + deletions + insertions; }
  double rate() const {
    return static_cast<double>(errors()) / static_cast<double>(std::max<int64_t>(ref_len, 1));
  }
  ErrorBreakdown& operator+=(const ErrorBreakdown& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_len += o.ref_len;
    return *this;
  }
};

// Unit-cost Levenshtein alignment. Among minimal-cost alignments the one with
// the fewest deletions+insertions wins (substitutions preferred over
// insert+delete pairs), then the fewest insertions.
ErrorBreakdown edit_distance(std::span<const int32_t> ref, std::span<const int32_t> hyp);

}  // namespace isib

#endif  // ISIB_EDIT_DISTANCE_HPP_
