// tests/micro_model.hpp

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

// Micro model used by the finite-difference pipeline checks: T=5 frames,
// D=3 features, K=4 clusters, V=2 labels per side. Central differences are
// only meaningful away from the relu kinks, so after drawing the world we
// shift each relu unit's bias to the gap that maximizes its distance from
// zero (the pipeline analogue of probing relu "away from 0").

#ifndef ISIBKIT_TESTS_MICRO_MODEL_HPP_
#define ISIBKIT_TESTS_MICRO_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "isib/model.hpp"
#include "isib/rng.hpp"

namespace isib::test {

struct MicroWorld {
  ModelParams params;
  Utterance utt_l1, utt_l2;
};

namespace micro_detail {

// Shifts bias[u] so that min_t |pre[t][u] + shift| is as large as possible.
inline void widen_kink_margins(Tensor& bias, const std::vector<Tensor>& pre_activations) {
  const int64_t units = bias.dim(0);
  for (int64_t u = 0; u < units; ++u) {
    double best_shift = 0.0, best_margin = -1.0;
    for (int step = -20; step <= 20; ++step) {
      const double shift = 0.01 * step;
      double margin = 1e9;
      for (const Tensor& pre : pre_activations)
        for (int64_t t = 0; t < pre.dim(0); ++t)
          margin = std::min(margin, std::abs(static_cast<double>(pre.at(t, u)) + shift));
      if (margin > best_margin) {
        best_margin = margin;
        best_shift = shift;
      }
    }
    bias.at(u) += static_cast<float>(best_shift);
  }
}

}  // namespace micro_detail

inline MicroWorld make_micro(uint64_t seed) {
  Rng rng(seed);
  MicroWorld w;
  w.params.encoder.context = 1;
  w.params.tau = 1.0f;
  auto rand_tensor = [&rng](std::vector<int64_t> shape, float scale) {
    Tensor t(std::move(shape));
    for (float& v : t.values()) v = rng.uniform(-scale, scale);
    return t;
  };
  w.params.encoder.w1 = rand_tensor({9, 4}, 0.8f);
  w.params.encoder.b1 = rand_tensor({4}, 0.2f);
  w.params.encoder.w2 = rand_tensor({4, 3}, 0.8f);
  w.params.encoder.b2 = rand_tensor({3}, 0.2f);
  w.params.codebook.centroids = rand_tensor({4, 3}, 1.0f);
  for (AsrHeadParams* head : {&w.params.head_l1, &w.params.head_l2}) {
    head->vocab = 2;
    head->w1 = rand_tensor({3, 4}, 0.8f);
    head->b1 = rand_tensor({4}, 0.2f);
    head->w2 = rand_tensor({4, 3}, 0.8f);
    head->b2 = rand_tensor({3}, 0.2f);
  }
  w.utt_l1.features = rand_tensor({5, 3}, 1.0f);
  w.utt_l1.transcript = {{1, 2}, 2};
  w.utt_l2.features = rand_tensor({5, 3}, 1.0f);
  w.utt_l2.transcript = {{2}, 2};

  // Encoder relu margins, over both utterances (the encoder is shared).
  {
    std::vector<Tensor> pres;
    for (const Utterance* u : {&w.utt_l1, &w.utt_l2})
      pres.push_back(affine(window_stack(u->features, 1), w.params.encoder.w1,
                            w.params.encoder.b1));
    micro_detail::widen_kink_margins(w.params.encoder.b1, pres);
  }
  // Head relu margins; each head sees its own language's utterance.
  for (Lang lang : {Lang::kL1, Lang::kL2}) {
    const Utterance& utt = lang == Lang::kL1 ? w.utt_l1 : w.utt_l2;
    AsrHeadParams& head = lang == Lang::kL1 ? w.params.head_l1 : w.params.head_l2;
    BranchTrace trace;
    forward_branch(utt, lang, w.params, DiffKmMode::kSoftPath, &trace);
    micro_detail::widen_kink_margins(head.b1, {trace.head_relu.saved[0]});
  }
  return w;
}

}  // namespace isib::test

#endif  // ISIBKIT_TESTS_MICRO_MODEL_HPP_
