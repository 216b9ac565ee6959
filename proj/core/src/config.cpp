// core/src/config.cpp

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

#include "isib/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "isib/error.hpp"
#include "isib/rng.hpp"

namespace isib {

namespace {

using nlohmann::json;

// Applies the keys present in j onto the fields, rejecting unknown keys.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ~StrictObject() = default;

  template <typename T>
  void field(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  const json* object(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void apply_language(const json& j, const std::string& path, LanguageGenConfig& cfg) {
  StrictObject o(j, path);
  o.field("phones", cfg.phones);
  o.field("words", cfg.words);
  o.field("separation", cfg.separation);
  o.field("emission_stdev", cfg.emission_stdev);
  o.field("mean_duration", cfg.mean_duration);
  o.field("duration_jitter", cfg.duration_jitter);
  o.finish();
}

void apply_train(const json& j, TrainConfig& cfg) {
  StrictObject o(j, "train");
  o.field("alpha", cfg.alpha);
  o.field("tau", cfg.tau);
  o.field("stage1_epochs", cfg.stage1_epochs);
  o.field("stage2_epochs", cfg.stage2_epochs);
  o.field("stage1_lr", cfg.stage1_lr);
  o.field("stage2_lr", cfg.stage2_lr);
  o.field("batch_size", cfg.batch_size);
  o.field("grad_clip", cfg.grad_clip);
  o.field("k", cfg.k);
  o.field("context", cfg.context);
  o.field("hidden", cfg.hidden);
  o.field("head_hidden", cfg.head_hidden);
  if (const json* km = o.object("kmeans")) {
    StrictObject k(*km, "train.kmeans");
    k.field("max_iter", cfg.kmeans_max_iter);
    k.field("tol", cfg.kmeans_tol);
    k.field("max_points", cfg.kmeans_max_points);
    k.finish();
  }
  o.finish();
}

void apply_experiment(const json& j, ExperimentSection& cfg) {
  StrictObject o(j, "experiment");
  o.field("seeds", cfg.seeds);
  o.field("alpha_grid", cfg.alpha_grid);
  o.field("inits", cfg.inits);
  o.field("adaptation_sizes", cfg.adaptation_sizes);
  o.field("adaptation_epochs", cfg.adaptation_epochs);
  if (const json* ds = o.object("downstream")) {
    StrictObject d(*ds, "experiment.downstream");
    d.field("hidden", cfg.downstream.hidden);
    d.field("lr", cfg.downstream.lr);
    d.field("batch_size", cfg.downstream.batch_size);
    d.field("grad_clip", cfg.downstream.grad_clip);
    d.finish();
  }
  o.finish();
}

json language_json(const LanguageGenConfig& cfg) {
  return json{{"phones", cfg.phones},
              {"words", cfg.words},
              {"separation", cfg.separation},
              {"emission_stdev", cfg.emission_stdev},
              {"mean_duration", cfg.mean_duration},
              {"duration_jitter", cfg.duration_jitter}};
}

json config_json(const ExperimentConfig& cfg) {
  return json{
      {"version", cfg.version},
      {"seed", cfg.seed},
      {"feature_dim", cfg.feature_dim},
      {"paths", {{"data_dir", cfg.paths.data_dir}, {"output_dir", cfg.paths.output_dir}}},
      {"l1", language_json(cfg.l1)},
      {"l2", language_json(cfg.l2)},
      {"accent",
       {{"default_strength", cfg.accent.default_strength},
        {"strong_strength", cfg.accent.strong_strength}}},
      {"corpora",
       {{"train_utts", cfg.corpora.train_utts},
        {"test_utts", cfg.corpora.test_utts},
        {"adapt_utts", cfg.corpora.adapt_utts},
        {"words_per_utt_min", cfg.corpora.words_per_utt_min},
        {"words_per_utt_max", cfg.corpora.words_per_utt_max}}},
      {"train",
       {{"alpha", cfg.train.alpha},
        {"tau", cfg.train.tau},
        {"stage1_epochs", cfg.train.stage1_epochs},
        {"stage2_epochs", cfg.train.stage2_epochs},
        {"stage1_lr", cfg.train.stage1_lr},
        {"stage2_lr", cfg.train.stage2_lr},
        {"batch_size", cfg.train.batch_size},
        {"grad_clip", cfg.train.grad_clip},
        {"k", cfg.train.k},
        {"context", cfg.train.context},
        {"hidden", cfg.train.hidden},
        {"head_hidden", cfg.train.head_hidden},
        {"kmeans",
         {{"max_iter", cfg.train.kmeans_max_iter},
          {"tol", cfg.train.kmeans_tol},
          {"max_points", cfg.train.kmeans_max_points}}}}},
      {"experiment",
       {{"seeds", cfg.experiment.seeds},
        {"alpha_grid", cfg.experiment.alpha_grid},
        {"inits", cfg.experiment.inits},
        {"adaptation_sizes", cfg.experiment.adaptation_sizes},
        {"adaptation_epochs", cfg.experiment.adaptation_epochs},
        {"downstream",
         {{"hidden", cfg.experiment.downstream.hidden},
          {"lr", cfg.experiment.downstream.lr},
          {"batch_size", cfg.experiment.downstream.batch_size},
          {"grad_clip", cfg.experiment.downstream.grad_clip}}}}}};
}

}  // namespace

LanguageSpec LanguageGenConfig::spec(const std::string& tag, int feature_dim) const {
  LanguageSpec s;
  s.tag = tag;
  s.phones = phones;
  s.words = words;
  s.feature_dim = feature_dim;
  s.separation = separation;
  s.emission_stdev = emission_stdev;
  s.mean_duration = mean_duration;
  s.duration_jitter = duration_jitter;
  return s;
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  // The two inventories deliberately differ in size so that some L2 phones
  // have no close L1 counterpart.
  cfg.l1.phones = 10;
  cfg.l2.phones = 12;
  return cfg;
}

void ExperimentConfig::validate() const {
  if (version != 1) throw ConfigError("config: unsupported version");
  if (feature_dim < 1) throw ConfigError("config: feature_dim must be >= 1");
  if (l1.phones < 2 || l2.phones < 2) throw ConfigError("config: need at least 2 phones");
  if (l1.words < 2 || l2.words < 2) throw ConfigError("config: need at least 2 words");
  if (!(accent.default_strength >= 0.0f && accent.default_strength <= 1.0f) ||
      !(accent.strong_strength >= 0.0f && accent.strong_strength <= 1.0f))
    throw ConfigError("config: accent strengths must lie in [0, 1]");
  if (corpora.train_utts < 1 || corpora.test_utts < 1 || corpora.adapt_utts < 1)
    throw ConfigError("config: corpus sizes must be >= 1");
  if (corpora.words_per_utt_min < 1 || corpora.words_per_utt_max < corpora.words_per_utt_min)
    throw ConfigError("config: bad words-per-utterance range");
  if (!(train.alpha >= 0.0f && train.alpha <= 1.0f))
    throw ConfigError("config: train.alpha must lie in [0, 1]");
  if (!(train.stage1_lr > 0.0f) || !(train.stage2_lr >= 0.0f))
    throw ConfigError("config: learning rates must be positive");
  if (train.stage1_epochs < 1 || train.stage2_epochs < 0)
    throw ConfigError("config: bad epoch counts");
  if (train.batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (train.k < 1) throw ConfigError("config: k must be >= 1");
  if (!(train.tau > 0.0f)) throw ConfigError("config: tau must be positive");
  if (experiment.seeds.empty()) throw ConfigError("config: need at least one seed");
  if (experiment.inits.empty()) throw ConfigError("config: need at least one init language");
  for (const std::string& init : experiment.inits)
    if (init != "l1" && init != "l2")
      throw ConfigError("config: init must be 'l1' or 'l2', got '" + init + "'");
  for (float a : experiment.alpha_grid)
    if (!(a >= 0.0f && a <= 1.0f)) throw ConfigError("config: alpha grid values must lie in [0, 1]");
  if (experiment.adaptation_sizes.size() != experiment.adaptation_epochs.size())
    throw ConfigError("config: adaptation_sizes and adaptation_epochs must pair up");
  for (int n : experiment.adaptation_sizes)
    if (n < 1) throw ConfigError("config: adaptation sizes must be >= 1");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }

  ExperimentConfig cfg = ExperimentConfig::defaults();
  StrictObject o(j, "config");
  o.field("version", cfg.version);
  o.field("seed", cfg.seed);
  o.field("feature_dim", cfg.feature_dim);
  if (const json* paths = o.object("paths")) {
    StrictObject p(*paths, "paths");
    p.field("data_dir", cfg.paths.data_dir);
    p.field("output_dir", cfg.paths.output_dir);
    p.finish();
  }
  if (const json* l1 = o.object("l1")) apply_language(*l1, "l1", cfg.l1);
  if (const json* l2 = o.object("l2")) apply_language(*l2, "l2", cfg.l2);
  if (const json* accent = o.object("accent")) {
    StrictObject a(*accent, "accent");
    a.field("default_strength", cfg.accent.default_strength);
    a.field("strong_strength", cfg.accent.strong_strength);
    a.finish();
  }
  if (const json* corpora = o.object("corpora")) {
    StrictObject c(*corpora, "corpora");
    c.field("train_utts", cfg.corpora.train_utts);
    c.field("test_utts", cfg.corpora.test_utts);
    c.field("adapt_utts", cfg.corpora.adapt_utts);
    c.field("words_per_utt_min", cfg.corpora.words_per_utt_min);
    c.field("words_per_utt_max", cfg.corpora.words_per_utt_max);
    c.finish();
  }
  if (const json* train = o.object("train")) apply_train(*train, cfg.train);
  if (const json* experiment = o.object("experiment")) apply_experiment(*experiment, cfg.experiment);
  o.finish();

  cfg.validate();
  return cfg;
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config: " + path.string());
  out << config_json(cfg).dump(2) << "\n";
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(); }

std::string config_hash_hex(const ExperimentConfig& cfg) {
  const uint64_t h = Rng::fnv1a64(config_to_json(cfg));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace isib
