// core/src/model.cpp

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

#include "isib/model.hpp"

#include <cmath>

#include "isib/ctc.hpp"
#include "isib/error.hpp"
#include "isib/parallel.hpp"

namespace isib {

namespace {

const AffineLayer kAffine;
const ReluLayer kRelu;

const AsrHeadParams& head_for(const ModelParams& params, Lang lang) {
  return lang == Lang::kL1 ? params.head_l1 : params.head_l2;
}

}  // namespace

Lang parse_lang(const std::string& tag) {
  if (tag == "l1") return Lang::kL1;
  if (tag == "l2") return Lang::kL2;
  throw InvalidInputError("unknown language tag '" + tag + "' (expected l1 or l2)");
}

std::string lang_tag(Lang lang) { return lang == Lang::kL1 ? "l1" : "l2"; }

std::vector<Tensor*> ModelParams::tensors() {
  return {&encoder.w1, &encoder.b1, &encoder.w2, &encoder.b2,
          &codebook.centroids,
          &head_l1.w1, &head_l1.b1, &head_l1.w2, &head_l1.b2,
          &head_l2.w1, &head_l2.b1, &head_l2.w2, &head_l2.b2};
}

std::vector<const Tensor*> ModelParams::tensors() const {
  return {&encoder.w1, &encoder.b1, &encoder.w2, &encoder.b2,
          &codebook.centroids,
          &head_l1.w1, &head_l1.b1, &head_l1.w2, &head_l1.b2,
          &head_l2.w1, &head_l2.b1, &head_l2.w2, &head_l2.b2};
}

const std::vector<std::string>& ModelParams::tensor_names() {
  static const std::vector<std::string> names = {
      "encoder.w1", "encoder.b1", "encoder.w2", "encoder.b2",
      "codebook.centroids",
      "head_l1.w1", "head_l1.b1", "head_l1.w2", "head_l1.b2",
      "head_l2.w1", "head_l2.b1", "head_l2.w2", "head_l2.b2"};
  return names;
}

ModelGrads ModelGrads::zeros_like(const ModelParams& params) {
  ModelGrads g;
  for (const Tensor* t : params.tensors()) g.tensors.push_back(Tensor::zeros(t->shape()));
  return g;
}

void ModelGrads::accumulate(const ModelGrads& other) {
  for (size_t i = 0; i < tensors.size(); ++i) {
    auto dst = tensors[i].values();
    auto src = other.tensors[i].values();
    for (size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

Tensor window_stack(const Tensor& frames, int context) {
  require_rank(frames, 2, "window_stack frames");
  const int64_t t_len = frames.dim(0), d = frames.dim(1);
  const int64_t width = (2 * context + 1) * d;
  Tensor out({t_len, width});
  for (int64_t t = 0; t < t_len; ++t) {
    float* row = out.row(t).data();
    for (int off = -context; off <= context; ++off) {
      const int64_t src = t + off;
      float* dst = row + (off + context) * d;
      if (src >= 0 && src < t_len) {
        const float* s = frames.row(src).data();
        for (int64_t c = 0; c < d; ++c) dst[c] = s[c];
      }
    }
  }
  return out;
}

Tensor forward_branch(const Utterance& utt, Lang lang, const ModelParams& params,
                      DiffKmMode mode, BranchTrace* trace) {
  const AsrHeadParams& head = head_for(params, lang);
  if (utt.features.rank() != 2 || utt.features.dim(1) != params.feature_dim())
    throw InvalidInputError("forward_branch: utterance feature dim does not match encoder input");

  BranchTrace local;
  BranchTrace& tr = trace ? *trace : local;
  tr.windowed = window_stack(utt.features, params.encoder.context);

  const Tensor enc_in[] = {tr.windowed};
  const Tensor enc_p1[] = {params.encoder.w1, params.encoder.b1};
  Tensor h1 = kAffine.forward(enc_in, enc_p1, trace ? &tr.enc_aff1 : nullptr)[0];
  const Tensor relu_in[] = {h1};
  Tensor a1 = kRelu.forward(relu_in, {}, trace ? &tr.enc_relu : nullptr)[0];
  const Tensor enc_in2[] = {a1};
  const Tensor enc_p2[] = {params.encoder.w2, params.encoder.b2};
  Tensor enc_out = kAffine.forward(enc_in2, enc_p2, trace ? &tr.enc_aff2 : nullptr)[0];

  const DiffKmLayer quantizer(params.tau, mode);
  const Tensor q_in[] = {enc_out};
  const Tensor q_p[] = {params.codebook.centroids};
  Tensor emb = quantizer.forward(q_in, q_p, trace ? &tr.diffkm : nullptr)[0];

  const Tensor head_in[] = {emb};
  const Tensor head_p1[] = {head.w1, head.b1};
  Tensor g1 = kAffine.forward(head_in, head_p1, trace ? &tr.head_aff1 : nullptr)[0];
  const Tensor head_relu_in[] = {g1};
  Tensor ga = kRelu.forward(head_relu_in, {}, trace ? &tr.head_relu : nullptr)[0];
  const Tensor head_in2[] = {ga};
  const Tensor head_p2[] = {head.w2, head.b2};
  return kAffine.forward(head_in2, head_p2, trace ? &tr.head_aff2 : nullptr)[0];
}

void branch_backward(const BranchTrace& trace, Lang lang, const ModelParams& params,
                     const Tensor& grad_logits, float scale, bool freeze_trunk,
                     ModelGrads* grads) {
  const int head_base = lang == Lang::kL1 ? ModelGrads::kHeadL1Begin : ModelGrads::kHeadL2Begin;
  auto add_scaled = [scale](Tensor& dst, const Tensor& src) {
    auto d = dst.values();
    auto s = src.values();
    for (size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
  };

  std::vector<Tensor> gi, gp;
  const Tensor g0[] = {grad_logits};
  kAffine.backward(trace.head_aff2, g0, &gi, &gp);
  add_scaled(grads->tensors[static_cast<size_t>(head_base + 2)], gp[0]);
  add_scaled(grads->tensors[static_cast<size_t>(head_base + 3)], gp[1]);

  std::vector<Tensor> gi2;
  kRelu.backward(trace.head_relu, gi, &gi2, nullptr);
  kAffine.backward(trace.head_aff1, gi2, &gi, &gp);
  add_scaled(grads->tensors[static_cast<size_t>(head_base + 0)], gp[0]);
  add_scaled(grads->tensors[static_cast<size_t>(head_base + 1)], gp[1]);

  if (freeze_trunk) return;

  // gi holds the gradient on the quantizer output.
  const DiffKmLayer quantizer(params.tau);
  std::vector<Tensor> gq, gm;
  quantizer.backward(trace.diffkm, gi, &gq, &gm);
  add_scaled(grads->tensors[ModelGrads::kCentroids], gm[0]);

  kAffine.backward(trace.enc_aff2, gq, &gi, &gp);
  add_scaled(grads->tensors[2], gp[0]);
  add_scaled(grads->tensors[3], gp[1]);
  kRelu.backward(trace.enc_relu, gi, &gi2, nullptr);
  kAffine.backward(trace.enc_aff1, gi2, &gi, &gp);
  add_scaled(grads->tensors[0], gp[0]);
  add_scaled(grads->tensors[1], gp[1]);
  // The gradient on the windowed input is never needed; features are data.
}

namespace {

// Mean branch nll over a batch, with scale/batch gradients reduced in
// utterance order for bitwise reproducibility.
double branch_batch_loss(std::span<const Utterance> batch, Lang lang,
                         const MultitaskOptions& options, const ModelParams& params, float weight,
                         ModelGrads* grads) {
  const int64_t n = static_cast<int64_t>(batch.size());
  std::vector<double> nlls(static_cast<size_t>(n), 0.0);
  std::vector<ModelGrads> slots;
  if (grads) {
    slots.reserve(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) slots.push_back(ModelGrads::zeros_like(params));
  }
  const float scale = weight / static_cast<float>(n);

  parallel_for(n, [&](int64_t i) {
    const Utterance& utt = batch[static_cast<size_t>(i)];
    BranchTrace trace;
    Tensor logits = forward_branch(utt, lang, params, options.mode, grads ? &trace : nullptr);
    CtcResult ctc = ctc_loss(logits, utt.transcript);
    nlls[static_cast<size_t>(i)] = ctc.nll;
    if (grads)
      branch_backward(trace, lang, params, ctc.grad_logits, scale, options.freeze_trunk,
                      &slots[static_cast<size_t>(i)]);
  }, /*grain=*/1);

  double mean = 0.0;
  for (int64_t i = 0; i < n; ++i) mean += nlls[static_cast<size_t>(i)];
  mean /= static_cast<double>(n);
  if (grads)
    for (int64_t i = 0; i < n; ++i) grads->accumulate(slots[static_cast<size_t>(i)]);
  return mean;
}

}  // namespace

LossReport multitask_loss(std::span<const Utterance> batch_l1,
                          std::span<const Utterance> batch_l2, const MultitaskOptions& options,
                          const ModelParams& params, ModelGrads* grads) {
  if (!(options.alpha >= 0.0f && options.alpha <= 1.0f))
    throw InvalidInputError("multitask_loss: alpha must lie in [0, 1]");
  const float w_l1 = options.alpha;
  const float w_l2 = 1.0f - options.alpha;
  if (w_l1 > 0.0f && batch_l1.empty())
    throw InvalidInputError("multitask_loss: L1 batch empty with alpha > 0");
  if (w_l2 > 0.0f && batch_l2.empty())
    throw InvalidInputError("multitask_loss: L2 batch empty with alpha < 1");

  LossReport report;
  report.alpha = options.alpha;
  if (w_l2 > 0.0f)
    report.loss_l2 = branch_batch_loss(batch_l2, Lang::kL2, options, params, w_l2, grads);
  if (w_l1 > 0.0f)
    report.loss_l1 = branch_batch_loss(batch_l1, Lang::kL1, options, params, w_l1, grads);
  report.total = static_cast<double>(w_l2) * report.loss_l2 +
                 static_cast<double>(w_l1) * report.loss_l1;
  return report;
}

LabelSequence recognize(const Utterance& utt, Lang lang, const ModelParams& params) {
  Tensor logits = forward_branch(utt, lang, params);
  LabelSequence out;
  out.labels = greedy_decode(logits);
  out.vocab = head_for(params, lang).vocab;
  return out;
}

std::vector<int32_t> tokenize(const Utterance& utt, const ModelParams& params) {
  if (utt.features.rank() != 2 || utt.features.dim(1) != params.feature_dim())
    throw InvalidInputError("tokenize: utterance feature dim does not match encoder input");
  Tensor windowed = window_stack(utt.features, params.encoder.context);
  Tensor h1 = affine(windowed, params.encoder.w1, params.encoder.b1);
  Tensor enc_out = affine(relu(h1), params.encoder.w2, params.encoder.b2);
  DiffKmOutput q = diffkm_forward(enc_out, params.codebook, params.tau);
  return std::move(q.tokens);
}

double corpus_loss(const ModelParams& params, std::span<const Utterance> corpus, Lang lang) {
  if (corpus.empty()) throw InvalidInputError("corpus_loss: empty corpus");
  std::vector<double> nlls(corpus.size(), 0.0);
  parallel_for(static_cast<int64_t>(corpus.size()), [&](int64_t i) {
    Tensor logits = forward_branch(corpus[static_cast<size_t>(i)], lang, params);
    nlls[static_cast<size_t>(i)] = ctc_loss(logits, corpus[static_cast<size_t>(i)].transcript).nll;
  }, /*grain=*/1);
  double mean = 0.0;
  for (double v : nlls) mean += v;
  return mean / static_cast<double>(corpus.size());
}

}  // namespace isib
