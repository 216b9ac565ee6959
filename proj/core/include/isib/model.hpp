// core/include/isib/model.hpp

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

#ifndef ISIB_MODEL_HPP_
#define ISIB_MODEL_HPP_

#include <span>
#include <string>
#include <vector>

#include "isib/diffkm.hpp"
#include "isib/kmeans.hpp"
#include "isib/layers.hpp"
#include "isib/synthlang.hpp"

namespace isib {

enum class Lang { kL1, kL2 };

Lang parse_lang(const std::string& tag);  // "l1" / "l2"
std::string lang_tag(Lang lang);

// Frame encoder standing in for a pretrained feature extractor: each frame is
// concatenated with its +-context neighbours (zero padded at the edges) and
// pushed through affine/relu/affine down to the codebook dimension.
struct EncoderParams {
  int context = 2;
  Tensor w1, b1;  // (2c+1)*D_in -> hidden
  Tensor w2, b2;  // hidden -> D
};

struct AsrHeadParams {
  Tensor w1, b1;  // D -> hidden
  Tensor w2, b2;  // hidden -> vocab+1 logits, column 0 blank
  int32_t vocab = 0;
};

struct ModelParams {
  EncoderParams encoder;
  Codebook codebook;
  AsrHeadParams head_l1;
  AsrHeadParams head_l2;
  float tau = 1.0f;

  int feature_dim() const { return static_cast<int>(encoder.w1.dim(0) / (2 * encoder.context + 1)); }

  // Canonical tensor order shared by the optimizer, the gradient container
  // and the checkpoint format.
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  static const std::vector<std::string>& tensor_names();
};

// Gradients shaped like ModelParams, in the same canonical order.
struct ModelGrads {
  std::vector<Tensor> tensors;

  static ModelGrads zeros_like(const ModelParams& params);
  void accumulate(const ModelGrads& other);
  Tensor& encoder_w1() { return tensors[0]; }
  Tensor& centroids() { return tensors[4]; }
  // Index ranges in the canonical order.
  static constexpr int kEncoderBegin = 0, kEncoderEnd = 4;
  static constexpr int kCentroids = 4;
  static constexpr int kHeadL1Begin = 5, kHeadL1End = 9;
  static constexpr int kHeadL2Begin = 9, kHeadL2End = 13;
};

// Saved activations of one branch pass, consumed by branch_backward.
struct BranchTrace {
  LayerContext enc_aff1, enc_relu, enc_aff2, diffkm, head_aff1, head_relu, head_aff2;
  Tensor windowed;  // T x (2c+1)D
};

// Window gather used by the encoder.
Tensor window_stack(const Tensor& frames, int context);

// logits = head(diffkm(encoder(features))). Both branches share the encoder
// and the codebook and differ only in the head.
Tensor forward_branch(const Utterance& utt, Lang lang, const ModelParams& params,
                      DiffKmMode mode = DiffKmMode::kStraightThrough,
                      BranchTrace* trace = nullptr);

// Accumulates scale * gradients of the branch into grads. With freeze_trunk
// only the head receives gradients.
void branch_backward(const BranchTrace& trace, Lang lang, const ModelParams& params,
                     const Tensor& grad_logits, float scale, bool freeze_trunk,
                     ModelGrads* grads);

struct LossReport {
  double total = 0.0;
  double loss_l1 = 0.0;
  double loss_l2 = 0.0;
  float alpha = 0.0f;
  int64_t step = -1;
};

struct MultitaskOptions {
  float alpha = 0.0f;
  bool freeze_trunk = false;
  DiffKmMode mode = DiffKmMode::kStraightThrough;
};

// total = (1-alpha) * mean_l2_nll + alpha * mean_l1_nll. A branch whose
// weight is exactly zero is skipped entirely: its loss reports 0 and its head
// receives no gradient. Utterances within a batch may be processed in
// parallel; gradients reduce in utterance order.
LossReport multitask_loss(std::span<const Utterance> batch_l1,
                          std::span<const Utterance> batch_l2, const MultitaskOptions& options,
                          const ModelParams& params, ModelGrads* grads);

// Greedy CTC transcription with the requested head.
LabelSequence recognize(const Utterance& utt, Lang lang, const ModelParams& params);

// Hard token ids from the encoder and codebook only; heads stay unused.
std::vector<int32_t> tokenize(const Utterance& utt, const ModelParams& params);

// Mean per-utterance nll of one branch over a corpus (forward only).
double corpus_loss(const ModelParams& params, std::span<const Utterance> corpus, Lang lang);

}  // namespace isib

#endif  // ISIB_MODEL_HPP_
