// core/include/isib/train.hpp

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

#ifndef ISIB_TRAIN_HPP_
#define ISIB_TRAIN_HPP_

#include <span>
#include <string>
#include <vector>

#include "isib/checkpoint.hpp"
#include "isib/edit_distance.hpp"
#include "isib/model.hpp"

namespace isib {

struct TrainConfig {
  float alpha = 0.0f;
  float tau = 1.0f;
  int stage1_epochs = 15;
  int stage2_epochs = 15;
  float stage1_lr = 1e-2f;
  float stage2_lr = 1e-3f;
  int batch_size = 16;
  float grad_clip = 5.0f;
  uint64_t seed = 1;

  int64_t k = 64;
  int context = 2;
  int hidden = 32;
  int head_hidden = 32;

  int kmeans_max_iter = 50;
  double kmeans_tol = 1e-4;
  int64_t kmeans_max_points = 20000;
};

struct TrainLog {
  std::vector<LossReport> steps;   // every optimizer step
  std::vector<LossReport> epochs;  // mean over the steps of each epoch
};

// Fresh model: seeded encoder and heads, codebook fitted by plain k-means on
// the encoder outputs of init_corpus. The parameter draw depends only on the
// seed, so models that differ in init language share the same encoder.
Checkpoint init_model(const TrainConfig& config, int feature_dim, int32_t vocab_l1,
                      int32_t vocab_l2, std::span<const Utterance> init_corpus,
                      const std::string& init_language, const std::string& config_hash = "");

// Stage 1: encoder and codebook frozen, heads trained under the alpha-weighted
// loss. Requires an "init" checkpoint. Stage 2: everything trains, including
// the centroids through the quantizer's soft path. Requires a "stage1"
// checkpoint. Both advance the checkpoint's stage tag.
TrainLog train_stage1(Checkpoint& ckpt, std::span<const Utterance> corpus_l1,
                      std::span<const Utterance> corpus_l2, const TrainConfig& config);
TrainLog train_stage2(Checkpoint& ckpt, std::span<const Utterance> corpus_l1,
                      std::span<const Utterance> corpus_l2, const TrainConfig& config);

// Corpus-level error counts of greedy recognition with one head.
ErrorBreakdown evaluate_corpus(const ModelParams& params, std::span<const Utterance> corpus,
                               Lang lang);

}  // namespace isib

#endif  // ISIB_TRAIN_HPP_
