// core/include/isib/ctc.hpp

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

#ifndef ISIB_CTC_HPP_
#define ISIB_CTC_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "isib/tensor.hpp"

namespace isib {

// Transcript over an integer alphabet. Label 0 is reserved for the CTC blank
// everywhere in the repo, so valid labels lie in [1, vocab].
struct LabelSequence {
  std::vector<int32_t> labels;
  int32_t vocab = 0;

  int64_t length() const { return static_cast<int64_t>(labels.size()); }
};

void validate_labels(const LabelSequence& seq);

struct CtcResult {
  double nll = 0.0;          // negative log-likelihood over all alignments
  Tensor grad_logits;        // T x (V+1), analytic gradient of nll
};

// Alignment-free sequence loss over per-frame softmax distributions, computed
// in log space by the forward-backward recursion. logits is T x (V+1) with
// column 0 the blank. Raises InfeasibleTargetError when no alignment fits in
// T frames (T < L + adjacent repeats).
CtcResult ctc_loss(const Tensor& logits, const LabelSequence& target);

// Frames needed to align the target: length plus adjacent repeats.
int64_t ctc_min_frames(const LabelSequence& target);

// Per-frame argmax, collapse adjacent repeats, drop blanks.
std::vector<int32_t> greedy_decode(const Tensor& logits);

}  // namespace isib

#endif  // ISIB_CTC_HPP_
