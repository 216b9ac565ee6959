// core/include/isib/experiment.hpp

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

#ifndef ISIB_EXPERIMENT_HPP_
#define ISIB_EXPERIMENT_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isib/config.hpp"
#include "isib/edit_distance.hpp"

namespace isib {

// One table row: codebook init language, whether the tokenizer is fine-tuned
// (stage 2), and the multi-task weight. Baseline rows keep the vanilla
// k-means codebook; their stage-1 head training uses alpha = 0.5, which only
// rescales the per-head learning rate since the trunk is frozen.
struct RowKey {
  std::string init;
  bool diffkm = false;
  float alpha = 0.0f;

  std::string alpha_label() const;  // "-" for baseline rows
  std::string label() const;        // filename-safe row name
};

std::vector<RowKey> experiment_rows(const ExperimentConfig& config);

struct CellStats {
  std::vector<ErrorBreakdown> per_seed;
  double median_rate = 0.0;
};

struct ReportRow {
  RowKey key;
  bool failed = false;
  std::string failure;
  std::map<std::string, CellStats> cells;
};

struct ReportTable {
  std::string scenario;
  std::string config_hash;
  std::vector<uint64_t> seeds;
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;

  const CellStats* find(const std::string& init, bool diffkm, float alpha,
                        const std::string& column) const;
};

// The synthetic universe of one seed: two native languages, the accented
// variants, and every corpus the drivers need.
struct World {
  Language l1, l2, accented, accented_strong;
  std::vector<Utterance> l1_train, l1_test;
  std::vector<Utterance> l2_train, l2_test;
  std::vector<Utterance> accent_test, accent_strong_test;
  std::vector<Utterance> accent_adapt;
};

World build_world(const ExperimentConfig& config, uint64_t seed);

// Lazily builds worlds and trains row checkpoints so the two drivers can
// share them. Everything is a pure function of (config, seed, row).
class ExperimentContext {
 public:
  explicit ExperimentContext(const ExperimentConfig& config);

  const ExperimentConfig& config() const { return config_; }
  const World& world(uint64_t seed);
  const Checkpoint& checkpoint(uint64_t seed, const RowKey& row);

 private:
  const Checkpoint& init_checkpoint(uint64_t seed, const std::string& init);

  ExperimentConfig config_;
  std::string config_hash_;
  std::map<uint64_t, World> worlds_;
  std::map<std::string, Checkpoint> init_checkpoints_;  // k-means init per (seed, init)
  std::map<std::string, Checkpoint> checkpoints_;
};

// Trains every configured row on native speech only and scores the L2 head on
// native L2, accented and strongly accented test sets, plus the L1 head on
// native L1. Cells aggregate over seeds (median rate, per-seed counts kept).
ReportTable run_native_only(const ExperimentConfig& config, ExperimentContext* ctx = nullptr);

// Uses each row's model as a tokenizer over the accented adaptation corpus,
// trains a downstream token recognizer per adaptation size on an 8:1:1
// utterance-group split, and scores the held-out test group.
ReportTable run_accent_adapted(const ExperimentConfig& config, ExperimentContext* ctx = nullptr);

// The downstream recognizer of the accent-adapted scenario: a learned
// embedding per token id into an affine/relu/affine CTC head. It sees token
// ids only; the tokenizer's centroids never reach it.
struct TokenSequence {
  std::vector<int32_t> tokens;
  LabelSequence transcript;
};

struct TokenAsrModel {
  Tensor emb;  // codebook_size x emb_dim
  Tensor w1, b1, w2, b2;
  int32_t vocab = 0;
};

TokenAsrModel train_token_asr(std::span<const TokenSequence> train_set, int64_t codebook_size,
                              int64_t emb_dim, int32_t vocab, const DownstreamConfig& config,
                              int epochs, Rng rng);
ErrorBreakdown evaluate_token_asr(const TokenAsrModel& model,
                                  std::span<const TokenSequence> test_set);

void write_report_csv(const ReportTable& table, const std::filesystem::path& path);
void write_report_json(const ReportTable& table, const std::filesystem::path& path);

// The `experiment` subcommand body: runs the requested scenarios and writes
// reports plus all row checkpoints under out_dir. Byte-identical outputs for
// identical configs.
void run_experiment_command(const ExperimentConfig& config, bool native_only,
                            bool accent_adapted, const std::filesystem::path& out_dir);

double median(std::vector<double> values);

}  // namespace isib

#endif  // ISIB_EXPERIMENT_HPP_
