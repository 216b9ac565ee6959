// core/src/experiment.cpp

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

#include "isib/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "isib/ctc.hpp"
#include "isib/error.hpp"
#include "isib/parallel.hpp"

namespace isib {

namespace {

using nlohmann::json;

std::string format_rate(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", rate);
  return buf;
}

json breakdown_json(const ErrorBreakdown& b) {
  return json{{"substitutions", b.substitutions},
              {"deletions", b.deletions},
              {"insertions", b.insertions},
              {"ref_len", b.ref_len},
              {"rate", b.rate()}};
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInputError("median of empty list");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string RowKey::alpha_label() const {
  if (!diffkm) return "-";
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", static_cast<double>(alpha));
  return buf;
}

std::string RowKey::label() const {
  return init + (diffkm ? "_alpha" + alpha_label() : "_vanilla");
}

std::vector<RowKey> experiment_rows(const ExperimentConfig& cfg) {
  std::vector<RowKey> rows;
  for (const std::string& init : cfg.experiment.inits) {
    rows.push_back({init, false, 0.0f});
    for (float alpha : cfg.experiment.alpha_grid) rows.push_back({init, true, alpha});
  }
  return rows;
}

const CellStats* ReportTable::find(const std::string& init, bool diffkm, float alpha,
                                   const std::string& column) const {
  for (const ReportRow& row : rows) {
    if (row.key.init != init || row.key.diffkm != diffkm) continue;
    if (diffkm && row.key.alpha != alpha) continue;
    auto it = row.cells.find(column);
    return it == row.cells.end() ? nullptr : &it->second;
  }
  return nullptr;
}

World build_world(const ExperimentConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  World w;
  w.l1 = make_language(cfg.l1.spec("l1", cfg.feature_dim), rng.child("lang_l1"));
  w.l2 = make_language(cfg.l2.spec("l2", cfg.feature_dim), rng.child("lang_l2"));
  w.accented = derive_accented(make_accent_spec(w.l2, w.l1, cfg.accent.default_strength));
  w.accented_strong = derive_accented(make_accent_spec(w.l2, w.l1, cfg.accent.strong_strength));

  const std::pair<int, int> wpu{cfg.corpora.words_per_utt_min, cfg.corpora.words_per_utt_max};
  w.l1_train = sample_corpus(w.l1, cfg.corpora.train_utts, wpu, rng.child("l1_train"));
  w.l1_test = sample_corpus(w.l1, cfg.corpora.test_utts, wpu, rng.child("l1_test"));
  w.l2_train = sample_corpus(w.l2, cfg.corpora.train_utts, wpu, rng.child("l2_train"));
  w.l2_test = sample_corpus(w.l2, cfg.corpora.test_utts, wpu, rng.child("l2_test"));
  w.accent_test = sample_corpus(w.accented, cfg.corpora.test_utts, wpu, rng.child("accent_test"));
  w.accent_strong_test =
      sample_corpus(w.accented_strong, cfg.corpora.test_utts, wpu, rng.child("accent_strong_test"));
  w.accent_adapt = sample_corpus(w.accented, cfg.corpora.adapt_utts, wpu, rng.child("accent_adapt"));
  return w;
}

ExperimentContext::ExperimentContext(const ExperimentConfig& cfg)
    : config_(cfg), config_hash_(config_hash_hex(cfg)) {}

const World& ExperimentContext::world(uint64_t seed) {
  auto it = worlds_.find(seed);
  if (it == worlds_.end()) it = worlds_.emplace(seed, build_world(config_, seed)).first;
  return it->second;
}

const Checkpoint& ExperimentContext::init_checkpoint(uint64_t seed, const std::string& init) {
  const std::string key = "seed" + std::to_string(seed) + "_" + init;
  auto it = init_checkpoints_.find(key);
  if (it != init_checkpoints_.end()) return it->second;

  const World& w = world(seed);
  TrainConfig tc = config_.train;
  tc.seed = seed;
  const auto& init_corpus = init == "l1" ? w.l1_train : w.l2_train;
  Checkpoint ckpt = init_model(tc, config_.feature_dim, w.l1.vocab(), w.l2.vocab(), init_corpus,
                               init, config_hash_);
  return init_checkpoints_.emplace(key, std::move(ckpt)).first->second;
}

const Checkpoint& ExperimentContext::checkpoint(uint64_t seed, const RowKey& row) {
  const std::string key = "seed" + std::to_string(seed) + "_" + row.label();
  auto it = checkpoints_.find(key);
  if (it != checkpoints_.end()) return it->second;

  const World& w = world(seed);
  TrainConfig tc = config_.train;
  tc.seed = seed;
  tc.alpha = row.diffkm ? row.alpha : 0.5f;

  // The parameter draw and the k-means fit do not depend on alpha, so rows
  // that share an init language share the cached init checkpoint.
  Checkpoint ckpt = init_checkpoint(seed, row.init);
  ckpt.meta.alpha = tc.alpha;
  train_stage1(ckpt, w.l1_train, w.l2_train, tc);
  if (row.diffkm) train_stage2(ckpt, w.l1_train, w.l2_train, tc);
  return checkpoints_.emplace(key, std::move(ckpt)).first->second;
}

ReportTable run_native_only(const ExperimentConfig& cfg, ExperimentContext* ctx) {
  ExperimentContext local(cfg);
  ExperimentContext& context = ctx ? *ctx : local;

  ReportTable table;
  table.scenario = "native_only";
  table.config_hash = config_hash_hex(cfg);
  table.seeds = cfg.experiment.seeds;
  table.columns = {"native_l2", "accented_all", "accented_strong", "native_l1"};

  for (const RowKey& key : experiment_rows(cfg)) {
    ReportRow row;
    row.key = key;
    try {
      std::map<std::string, std::vector<ErrorBreakdown>> per_seed;
      for (uint64_t seed : cfg.experiment.seeds) {
        const World& w = context.world(seed);
        const ModelParams& params = context.checkpoint(seed, key).params;
        per_seed["native_l2"].push_back(evaluate_corpus(params, w.l2_test, Lang::kL2));
        per_seed["accented_all"].push_back(evaluate_corpus(params, w.accent_test, Lang::kL2));
        per_seed["accented_strong"].push_back(
            evaluate_corpus(params, w.accent_strong_test, Lang::kL2));
        per_seed["native_l1"].push_back(evaluate_corpus(params, w.l1_test, Lang::kL1));
      }
      for (const std::string& col : table.columns) {
        CellStats stats;
        stats.per_seed = per_seed[col];
        std::vector<double> rates;
        for (const ErrorBreakdown& b : stats.per_seed) rates.push_back(b.rate());
        stats.median_rate = median(std::move(rates));
        row.cells[col] = std::move(stats);
      }
    } catch (const Error& e) {
      row.failed = true;
      row.failure = e.what();
      row.cells.clear();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Downstream token recognizer for the accent-adapted scenario.

namespace {

Tensor gather_rows(const Tensor& emb, const std::vector<int32_t>& ids) {
  const int64_t d = emb.dim(1);
  Tensor out({static_cast<int64_t>(ids.size()), d});
  for (size_t t = 0; t < ids.size(); ++t)
    std::copy_n(emb.row(ids[t]).data(), d, out.row(static_cast<int64_t>(t)).data());
  return out;
}

struct TokenGrads {
  Tensor emb, w1, b1, w2, b2;

  static TokenGrads zeros_like(const TokenAsrModel& m) {
    return {Tensor::zeros(m.emb.shape()), Tensor::zeros(m.w1.shape()),
            Tensor::zeros(m.b1.shape()), Tensor::zeros(m.w2.shape()),
            Tensor::zeros(m.b2.shape())};
  }
};

const AffineLayer kAffine;
const ReluLayer kRelu;

double token_utt_loss(const TokenAsrModel& model, const TokenSequence& utt, float scale,
                      TokenGrads* grads) {
  LayerContext aff1_ctx, relu_ctx, aff2_ctx;
  Tensor e = gather_rows(model.emb, utt.tokens);
  const Tensor in1[] = {e};
  const Tensor p1[] = {model.w1, model.b1};
  Tensor h = kAffine.forward(in1, p1, grads ? &aff1_ctx : nullptr)[0];
  const Tensor in2[] = {h};
  Tensor a = kRelu.forward(in2, {}, grads ? &relu_ctx : nullptr)[0];
  const Tensor in3[] = {a};
  const Tensor p2[] = {model.w2, model.b2};
  Tensor logits = kAffine.forward(in3, p2, grads ? &aff2_ctx : nullptr)[0];

  CtcResult ctc = ctc_loss(logits, utt.transcript);
  if (!grads) return ctc.nll;

  auto add_scaled = [scale](Tensor& dst, const Tensor& src) {
    auto d = dst.values();
    auto s = src.values();
    for (size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
  };

  std::vector<Tensor> gi, gp;
  const Tensor g0[] = {ctc.grad_logits};
  kAffine.backward(aff2_ctx, g0, &gi, &gp);
  add_scaled(grads->w2, gp[0]);
  add_scaled(grads->b2, gp[1]);
  std::vector<Tensor> gi2;
  kRelu.backward(relu_ctx, gi, &gi2, nullptr);
  kAffine.backward(aff1_ctx, gi2, &gi, &gp);
  add_scaled(grads->w1, gp[0]);
  add_scaled(grads->b1, gp[1]);

  // Scatter the embedding gradient back into the used rows.
  const Tensor& ge = gi[0];
  const int64_t d = model.emb.dim(1);
  for (size_t t = 0; t < utt.tokens.size(); ++t) {
    float* dst = grads->emb.row(utt.tokens[t]).data();
    const float* src = ge.row(static_cast<int64_t>(t)).data();
    for (int64_t c = 0; c < d; ++c) dst[c] += scale * src[c];
  }
  return ctc.nll;
}

void token_sgd_step(TokenAsrModel& model, const TokenGrads& grads, float lr, float clip) {
  Tensor* params[] = {&model.emb, &model.w1, &model.b1, &model.w2, &model.b2};
  const Tensor* gs[] = {&grads.emb, &grads.w1, &grads.b1, &grads.w2, &grads.b2};
  double sq_norm = 0.0;
  for (const Tensor* g : gs)
    for (float v : g->values()) sq_norm += static_cast<double>(v) * v;
  const double norm = std::sqrt(sq_norm);
  const float scale = (clip > 0.0f && norm > clip) ? static_cast<float>(clip / norm) : 1.0f;
  for (size_t i = 0; i < 5; ++i) {
    auto p = params[i]->values();
    auto g = gs[i]->values();
    for (size_t j = 0; j < p.size(); ++j) p[j] -= lr * scale * g[j];
  }
}

}  // namespace

TokenAsrModel train_token_asr(std::span<const TokenSequence> train_set, int64_t codebook_size,
                              int64_t emb_dim, int32_t vocab, const DownstreamConfig& ds,
                              int epochs, Rng rng) {
  const int64_t k = codebook_size;
  TokenAsrModel model;
  model.vocab = vocab;
  model.emb = Tensor({k, emb_dim});
  model.w1 = Tensor({emb_dim, ds.hidden});
  model.b1 = Tensor({ds.hidden});
  model.w2 = Tensor({ds.hidden, static_cast<int64_t>(vocab) + 1});
  model.b2 = Tensor({static_cast<int64_t>(vocab) + 1});
  Rng init_rng = rng.child("params");
  for (float& v : model.emb.values())
    v = init_rng.normal() * std::sqrt(1.0f / static_cast<float>(emb_dim));
  for (float& v : model.w1.values())
    v = init_rng.normal() * std::sqrt(2.0f / static_cast<float>(emb_dim));
  for (float& v : model.w2.values())
    v = init_rng.normal() * std::sqrt(1.0f / static_cast<float>(ds.hidden));

  const int64_t n = static_cast<int64_t>(train_set.size());
  std::vector<int64_t> perm(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  Rng shuffle_rng = rng.child("batches");

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int64_t i = n - 1; i > 0; --i) {
      const int64_t j = static_cast<int64_t>(shuffle_rng.bounded(static_cast<uint64_t>(i + 1)));
      std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    }
    for (int64_t start = 0; start < n; start += ds.batch_size) {
      const int64_t end = std::min(n, start + ds.batch_size);
      const int64_t count = end - start;
      std::vector<TokenGrads> slots;
      slots.reserve(static_cast<size_t>(count));
      for (int64_t i = 0; i < count; ++i) slots.push_back(TokenGrads::zeros_like(model));
      std::vector<double> nlls(static_cast<size_t>(count), 0.0);
      const float scale = 1.0f / static_cast<float>(count);
      parallel_for(count, [&](int64_t i) {
        nlls[static_cast<size_t>(i)] = token_utt_loss(
            model, train_set[static_cast<size_t>(perm[static_cast<size_t>(start + i)])], scale,
            &slots[static_cast<size_t>(i)]);
      }, /*grain=*/1);
      TokenGrads total = TokenGrads::zeros_like(model);
      for (int64_t i = 0; i < count; ++i) {
        Tensor* dst[] = {&total.emb, &total.w1, &total.b1, &total.w2, &total.b2};
        const Tensor* src[] = {&slots[static_cast<size_t>(i)].emb, &slots[static_cast<size_t>(i)].w1,
                               &slots[static_cast<size_t>(i)].b1, &slots[static_cast<size_t>(i)].w2,
                               &slots[static_cast<size_t>(i)].b2};
        for (int t = 0; t < 5; ++t) {
          auto d = dst[t]->values();
          auto s = src[t]->values();
          for (size_t j = 0; j < d.size(); ++j) d[j] += s[j];
        }
      }
      double step_loss = 0.0;
      for (double v : nlls) step_loss += v;
      if (!std::isfinite(step_loss))
        throw NumericError("downstream training: non-finite loss", epoch);
      token_sgd_step(model, total, ds.lr, ds.grad_clip);
    }
  }
  return model;
}

ErrorBreakdown evaluate_token_asr(const TokenAsrModel& model,
                                  std::span<const TokenSequence> test_set) {
  std::vector<ErrorBreakdown> parts(test_set.size());
  parallel_for(static_cast<int64_t>(test_set.size()), [&](int64_t i) {
    const TokenSequence& utt = test_set[static_cast<size_t>(i)];
    Tensor logits = affine(relu(affine(gather_rows(model.emb, utt.tokens), model.w1, model.b1)),
                           model.w2, model.b2);
    parts[static_cast<size_t>(i)] = edit_distance(utt.transcript.labels, greedy_decode(logits));
  }, /*grain=*/1);
  ErrorBreakdown total;
  for (const ErrorBreakdown& p : parts) total += p;
  return total;
}

ReportTable run_accent_adapted(const ExperimentConfig& cfg, ExperimentContext* ctx) {
  if (cfg.corpora.adapt_utts < 10)
    throw InvalidInputError("accent-adapted scenario needs at least 10 adaptation utterances");
  ExperimentContext local(cfg);
  ExperimentContext& context = ctx ? *ctx : local;

  ReportTable table;
  table.scenario = "accent_adapted";
  table.config_hash = config_hash_hex(cfg);
  table.seeds = cfg.experiment.seeds;
  for (int size : cfg.experiment.adaptation_sizes)
    table.columns.push_back("utts_" + std::to_string(size));

  for (const RowKey& key : experiment_rows(cfg)) {
    ReportRow row;
    row.key = key;
    try {
      std::map<std::string, std::vector<ErrorBreakdown>> per_seed;
      for (uint64_t seed : cfg.experiment.seeds) {
        const World& w = context.world(seed);
        const ModelParams& params = context.checkpoint(seed, key).params;

        // Tokenize the accented corpus with this row's model.
        std::vector<TokenSequence> tokenized(w.accent_adapt.size());
        parallel_for(static_cast<int64_t>(w.accent_adapt.size()), [&](int64_t i) {
          const Utterance& utt = w.accent_adapt[static_cast<size_t>(i)];
          tokenized[static_cast<size_t>(i)] = {tokenize(utt, params), utt.transcript};
        }, /*grain=*/1);

        // 8:1:1 split by utterance group, the pseudo-speaker bucket; the
        // validation group is held out of both pools.
        std::vector<TokenSequence> train_pool, test_set;
        for (size_t i = 0; i < tokenized.size(); ++i) {
          const int group = w.accent_adapt[i].group;
          if (group == 9)
            test_set.push_back(tokenized[i]);
          else if (group != 8)
            train_pool.push_back(tokenized[i]);
        }

        // Subset order depends only on the seed so every row trains on the
        // same utterances.
        std::vector<int64_t> order(train_pool.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int64_t>(i);
        Rng subset_rng = Rng(seed).child("adapt_subset");
        for (int64_t i = static_cast<int64_t>(order.size()) - 1; i > 0; --i) {
          const int64_t j = static_cast<int64_t>(subset_rng.bounded(static_cast<uint64_t>(i + 1)));
          std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
        }

        for (size_t s = 0; s < cfg.experiment.adaptation_sizes.size(); ++s) {
          const int size = cfg.experiment.adaptation_sizes[s];
          const int epochs = cfg.experiment.adaptation_epochs[s];
          const int64_t take = std::min<int64_t>(size, static_cast<int64_t>(train_pool.size()));
          std::vector<TokenSequence> subset;
          subset.reserve(static_cast<size_t>(take));
          for (int64_t i = 0; i < take; ++i)
            subset.push_back(train_pool[static_cast<size_t>(order[static_cast<size_t>(i)])]);

          Rng ds_rng = Rng(seed).child("downstream").child(key.label()).child(
              static_cast<uint64_t>(size));
          TokenAsrModel model = train_token_asr(subset, cfg.train.k, cfg.feature_dim,
                                                w.l2.vocab(), cfg.experiment.downstream, epochs,
                                                ds_rng);
          per_seed["utts_" + std::to_string(size)].push_back(
              evaluate_token_asr(model, test_set));
        }
      }
      for (const std::string& col : table.columns) {
        CellStats stats;
        stats.per_seed = per_seed[col];
        std::vector<double> rates;
        for (const ErrorBreakdown& b : stats.per_seed) rates.push_back(b.rate());
        stats.median_rate = median(std::move(rates));
        row.cells[col] = std::move(stats);
      }
    } catch (const Error& e) {
      row.failed = true;
      row.failure = e.what();
      row.cells.clear();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_report_csv(const ReportTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << "init,diffkm,alpha";
  for (const std::string& col : table.columns) out << ',' << col;
  out << '\n';
  for (const ReportRow& row : table.rows) {
    out << row.key.init << ',' << (row.key.diffkm ? 1 : 0) << ',' << row.key.alpha_label();
    for (const std::string& col : table.columns) {
      auto it = row.cells.find(col);
      out << ',' << (it == row.cells.end() ? "nan" : format_rate(it->second.median_rate));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing report: " + path.string());
}

void write_report_json(const ReportTable& table, const std::filesystem::path& path) {
  json rows = json::array();
  for (const ReportRow& row : table.rows) {
    json cells = json::object();
    for (const auto& [col, stats] : row.cells) {
      json per_seed = json::array();
      for (const ErrorBreakdown& b : stats.per_seed) per_seed.push_back(breakdown_json(b));
      cells[col] = {{"median_rate", stats.median_rate}, {"per_seed", per_seed}};
    }
    json jr = {{"init", row.key.init},
               {"diffkm", row.key.diffkm},
               {"alpha", row.key.diffkm ? json(row.key.alpha) : json()},
               {"cells", cells}};
    if (row.failed) jr["failure"] = row.failure;
    rows.push_back(std::move(jr));
  }
  const json doc = {{"format_version", 1},
                    {"scenario", table.scenario},
                    {"config_hash", table.config_hash},
                    {"seeds", table.seeds},
                    {"columns", table.columns},
                    {"rows", rows}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("failed writing report: " + path.string());
}

void run_experiment_command(const ExperimentConfig& cfg, bool native_only, bool accent_adapted,
                            const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  ExperimentContext context(cfg);

  if (native_only) {
    ReportTable table = run_native_only(cfg, &context);
    write_report_csv(table, out_dir / "native_only.csv");
    write_report_json(table, out_dir / "native_only.json");
  }
  if (accent_adapted) {
    ReportTable table = run_accent_adapted(cfg, &context);
    write_report_csv(table, out_dir / "accent_adapted.csv");
    write_report_json(table, out_dir / "accent_adapted.json");
  }

  const std::filesystem::path ckpt_dir = out_dir / "checkpoints";
  std::filesystem::create_directories(ckpt_dir);
  for (uint64_t seed : cfg.experiment.seeds)
    for (const RowKey& row : experiment_rows(cfg)) {
      try {
        const Checkpoint& ckpt = context.checkpoint(seed, row);
        save_checkpoint(ckpt, ckpt_dir / ("seed" + std::to_string(seed) + "_" + row.label() +
                                          ".ckpt"));
      } catch (const Error&) {
        // Row recorded as failed in the reports; nothing to save.
      }
    }
}

}  // namespace isib
