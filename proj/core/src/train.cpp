// core/src/train.cpp

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

#include "isib/train.hpp"

#include <algorithm>
#include <cmath>

#include "isib/error.hpp"
#include "isib/parallel.hpp"
#include "isib/rng.hpp"

namespace isib {

namespace {

void init_tensor(Tensor& t, Rng& rng, float scale) {
  for (float& v : t.values()) v = rng.normal() * scale;
}

// Draws every trainable tensor from one stream in canonical order.
void init_params(ModelParams& params, const TrainConfig& cfg, int feature_dim, int32_t vocab_l1,
                 int32_t vocab_l2, Rng rng) {
  const int64_t window = static_cast<int64_t>(2 * cfg.context + 1) * feature_dim;
  params.encoder.context = cfg.context;
  params.encoder.w1 = Tensor({window, cfg.hidden});
  params.encoder.b1 = Tensor({cfg.hidden});
  params.encoder.w2 = Tensor({cfg.hidden, feature_dim});
  params.encoder.b2 = Tensor({feature_dim});
  init_tensor(params.encoder.w1, rng, std::sqrt(2.0f / static_cast<float>(window)));
  init_tensor(params.encoder.w2, rng, std::sqrt(1.0f / static_cast<float>(cfg.hidden)));

  auto init_head = [&](AsrHeadParams& head, int32_t vocab) {
    head.vocab = vocab;
    head.w1 = Tensor({feature_dim, cfg.head_hidden});
    head.b1 = Tensor({cfg.head_hidden});
    head.w2 = Tensor({cfg.head_hidden, static_cast<int64_t>(vocab) + 1});
    head.b2 = Tensor({static_cast<int64_t>(vocab) + 1});
    init_tensor(head.w1, rng, std::sqrt(2.0f / static_cast<float>(feature_dim)));
    init_tensor(head.w2, rng, std::sqrt(1.0f / static_cast<float>(cfg.head_hidden)));
  };
  init_head(params.head_l1, vocab_l1);
  init_head(params.head_l2, vocab_l2);

  params.codebook.centroids = Tensor({cfg.k, feature_dim});
  params.tau = cfg.tau;
}

// Encoder outputs of a corpus, stride-subsampled to at most max_points rows.
Tensor encode_corpus_frames(const ModelParams& params, std::span<const Utterance> corpus,
                            int64_t max_points) {
  int64_t total = 0;
  for (const Utterance& u : corpus) total += u.features.dim(0);
  const int64_t stride = std::max<int64_t>(1, (total + max_points - 1) / max_points);

  const int d = params.feature_dim();
  std::vector<float> rows;
  int64_t cursor = 0;
  for (const Utterance& u : corpus) {
    Tensor enc = affine(relu(affine(window_stack(u.features, params.encoder.context),
                                    params.encoder.w1, params.encoder.b1)),
                        params.encoder.w2, params.encoder.b2);
    for (int64_t t = 0; t < enc.dim(0); ++t, ++cursor) {
      if (cursor % stride != 0) continue;
      const float* r = enc.row(t).data();
      rows.insert(rows.end(), r, r + d);
    }
  }
  const int64_t n = static_cast<int64_t>(rows.size()) / d;
  return Tensor::from({n, d}, std::move(rows));
}

// Draws index batches, reshuffling each time the corpus is exhausted.
class BatchCycler {
 public:
  BatchCycler(int64_t n, Rng rng) : n_(n), rng_(rng), perm_(static_cast<size_t>(n)) {
    for (int64_t i = 0; i < n; ++i) perm_[static_cast<size_t>(i)] = i;
    reshuffle();
  }

  std::vector<int64_t> take(int64_t count) {
    std::vector<int64_t> out;
    out.reserve(static_cast<size_t>(count));
    while (count-- > 0) {
      if (pos_ >= n_) reshuffle();
      out.push_back(perm_[static_cast<size_t>(pos_++)]);
    }
    return out;
  }

 private:
  void reshuffle() {
    for (int64_t i = n_ - 1; i > 0; --i) {
      const int64_t j = static_cast<int64_t>(rng_.bounded(static_cast<uint64_t>(i + 1)));
      std::swap(perm_[static_cast<size_t>(i)], perm_[static_cast<size_t>(j)]);
    }
    pos_ = 0;
  }

  int64_t n_;
  Rng rng_;
  std::vector<int64_t> perm_;
  int64_t pos_ = 0;
};

std::vector<Utterance> gather(std::span<const Utterance> corpus,
                              const std::vector<int64_t>& idx) {
  std::vector<Utterance> out;
  out.reserve(idx.size());
  for (int64_t i : idx) out.push_back(corpus[static_cast<size_t>(i)]);
  return out;
}

// Clipped SGD over the stage's trainable tensors, fixed order.
void sgd_step(ModelParams& params, const ModelGrads& grads, bool trunk_trainable, float lr,
              float clip) {
  auto ptrs = params.tensors();
  const int begin = trunk_trainable ? 0 : ModelGrads::kHeadL1Begin;

  double sq_norm = 0.0;
  for (size_t i = static_cast<size_t>(begin); i < ptrs.size(); ++i)
    for (float g : grads.tensors[i].values()) sq_norm += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq_norm);
  const float scale = (clip > 0.0f && norm > clip) ? static_cast<float>(clip / norm) : 1.0f;

  for (size_t i = static_cast<size_t>(begin); i < ptrs.size(); ++i) {
    auto p = ptrs[i]->values();
    auto g = grads.tensors[i].values();
    for (size_t j = 0; j < p.size(); ++j) p[j] -= lr * scale * g[j];
  }
}

TrainLog run_stage(Checkpoint& ckpt, std::span<const Utterance> corpus_l1,
                   std::span<const Utterance> corpus_l2, const TrainConfig& cfg, int epochs,
                   float lr, bool freeze_trunk, const char* stage_name) {
  MultitaskOptions options;
  options.alpha = cfg.alpha;
  options.freeze_trunk = freeze_trunk;

  const bool use_l1 = cfg.alpha > 0.0f;
  const bool use_l2 = cfg.alpha < 1.0f;
  if (use_l1 && corpus_l1.empty()) throw InvalidInputError("training: L1 corpus empty");
  if (use_l2 && corpus_l2.empty()) throw InvalidInputError("training: L2 corpus empty");

  const int64_t n_l1 = static_cast<int64_t>(corpus_l1.size());
  const int64_t n_l2 = static_cast<int64_t>(corpus_l2.size());
  // One epoch walks the larger corpus in use once; the smaller one cycles.
  const int64_t primary = std::max(use_l1 ? n_l1 : 0, use_l2 ? n_l2 : 0);
  const int64_t steps_per_epoch =
      (primary + cfg.batch_size - 1) / std::max(cfg.batch_size, 1);

  Rng stage_rng = Rng(cfg.seed).child(stage_name);
  BatchCycler cycler_l1(std::max<int64_t>(n_l1, 1), stage_rng.child("batch_l1"));
  BatchCycler cycler_l2(std::max<int64_t>(n_l2, 1), stage_rng.child("batch_l2"));

  TrainLog log;
  int64_t step = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    LossReport epoch_mean;
    epoch_mean.alpha = cfg.alpha;
    for (int64_t s = 0; s < steps_per_epoch; ++s, ++step) {
      std::vector<Utterance> batch_l1, batch_l2;
      if (use_l1) batch_l1 = gather(corpus_l1, cycler_l1.take(cfg.batch_size));
      if (use_l2) batch_l2 = gather(corpus_l2, cycler_l2.take(cfg.batch_size));

      ModelGrads grads = ModelGrads::zeros_like(ckpt.params);
      LossReport report = multitask_loss(batch_l1, batch_l2, options, ckpt.params, &grads);
      report.step = step;
      if (!std::isfinite(report.total))
        throw NumericError("training: non-finite loss at step " + std::to_string(step), step);

      sgd_step(ckpt.params, grads, !freeze_trunk, lr, cfg.grad_clip);

      epoch_mean.total += report.total;
      epoch_mean.loss_l1 += report.loss_l1;
      epoch_mean.loss_l2 += report.loss_l2;
      log.steps.push_back(report);
    }
    epoch_mean.total /= static_cast<double>(steps_per_epoch);
    epoch_mean.loss_l1 /= static_cast<double>(steps_per_epoch);
    epoch_mean.loss_l2 /= static_cast<double>(steps_per_epoch);
    epoch_mean.step = step - 1;
    log.epochs.push_back(epoch_mean);
  }
  return log;
}

void require_dims_match(const Checkpoint& ckpt, const TrainConfig& cfg) {
  if (ckpt.params.codebook.k() != cfg.k)
    throw StateError("checkpoint k=" + std::to_string(ckpt.params.codebook.k()) +
                     " does not match config k=" + std::to_string(cfg.k));
  if (ckpt.params.encoder.context != cfg.context)
    throw StateError("checkpoint context does not match config");
  if (ckpt.meta.alpha != cfg.alpha)
    throw StateError("checkpoint alpha does not match config alpha");
}

}  // namespace

Checkpoint init_model(const TrainConfig& cfg, int feature_dim, int32_t vocab_l1, int32_t vocab_l2,
                      std::span<const Utterance> init_corpus, const std::string& init_language,
                      const std::string& config_hash) {
  if (init_corpus.empty()) throw InvalidInputError("init_model: empty init corpus");

  Checkpoint ckpt;
  init_params(ckpt.params, cfg, feature_dim, vocab_l1, vocab_l2, Rng(cfg.seed).child("params"));

  Tensor frames = encode_corpus_frames(ckpt.params, init_corpus, cfg.kmeans_max_points);
  LloydResult fit = lloyd_fit(frames, cfg.k, Rng(cfg.seed).child("kmeans"), cfg.kmeans_max_iter,
                              cfg.kmeans_tol);
  ckpt.params.codebook = std::move(fit.codebook);

  ckpt.meta.stage = "init";
  ckpt.meta.init_language = init_language;
  ckpt.meta.alpha = cfg.alpha;
  ckpt.meta.tau = cfg.tau;
  ckpt.meta.seed = cfg.seed;
  ckpt.meta.config_hash = config_hash;
  return ckpt;
}

TrainLog train_stage1(Checkpoint& ckpt, std::span<const Utterance> corpus_l1,
                      std::span<const Utterance> corpus_l2, const TrainConfig& cfg) {
  if (ckpt.meta.stage != "init")
    throw StateError("train_stage1 needs an 'init' checkpoint, got '" + ckpt.meta.stage + "'");
  require_dims_match(ckpt, cfg);
  TrainLog log = run_stage(ckpt, corpus_l1, corpus_l2, cfg, cfg.stage1_epochs, cfg.stage1_lr,
                           /*freeze_trunk=*/true, "stage1");
  ckpt.meta.stage = "stage1";
  return log;
}

TrainLog train_stage2(Checkpoint& ckpt, std::span<const Utterance> corpus_l1,
                      std::span<const Utterance> corpus_l2, const TrainConfig& cfg) {
  if (ckpt.meta.stage != "stage1")
    throw StateError("train_stage2 needs a 'stage1' checkpoint, got '" + ckpt.meta.stage + "'");
  require_dims_match(ckpt, cfg);
  TrainLog log = run_stage(ckpt, corpus_l1, corpus_l2, cfg, cfg.stage2_epochs, cfg.stage2_lr,
                           /*freeze_trunk=*/false, "stage2");
  ckpt.meta.stage = "stage2";
  return log;
}

ErrorBreakdown evaluate_corpus(const ModelParams& params, std::span<const Utterance> corpus,
                               Lang lang) {
  std::vector<ErrorBreakdown> parts(corpus.size());
  parallel_for(static_cast<int64_t>(corpus.size()), [&](int64_t i) {
    const Utterance& utt = corpus[static_cast<size_t>(i)];
    LabelSequence hyp = recognize(utt, lang, params);
    parts[static_cast<size_t>(i)] = edit_distance(utt.transcript.labels, hyp.labels);
  }, /*grain=*/1);
  ErrorBreakdown total;
  for (const ErrorBreakdown& p : parts) total += p;
  return total;
}

}  // namespace isib
