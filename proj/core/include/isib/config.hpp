// core/include/isib/config.hpp

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

#ifndef ISIB_CONFIG_HPP_
#define ISIB_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "isib/synthlang.hpp"
#include "isib/train.hpp"

namespace isib {

struct LanguageGenConfig {
  int phones = 10;
  int words = 12;
  float separation = 4.0f;
  float emission_stdev = 0.25f;
  int mean_duration = 6;
  int duration_jitter = 1;

  LanguageSpec spec(const std::string& tag, int feature_dim) const;
};

struct AccentConfig {
  float default_strength = 0.6f;
  float strong_strength = 0.9f;
};

struct CorporaConfig {
  int train_utts = 400;
  int test_utts = 120;
  int adapt_utts = 2500;
  int words_per_utt_min = 2;
  int words_per_utt_max = 4;
};

struct DownstreamConfig {
  int hidden = 32;
  float lr = 1e-2f;
  int batch_size = 16;
  float grad_clip = 5.0f;
};

struct ExperimentSection {
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<float> alpha_grid = {0.0f, 0.3f, 0.5f, 0.7f};
  std::vector<std::string> inits = {"l1", "l2"};
  std::vector<int> adaptation_sizes = {200, 500, 2000};
  std::vector<int> adaptation_epochs = {150, 80, 30};  // paired with sizes
  DownstreamConfig downstream;
};

struct PathsConfig {
  std::string data_dir = "data";
  std::string output_dir = "out";
};

// Whole experiment tree. Loading starts from these defaults, overrides the
// keys present in the file and rejects anything unknown.
struct ExperimentConfig {
  int version = 1;
  uint64_t seed = 1;
  int feature_dim = 8;
  PathsConfig paths;
  LanguageGenConfig l1;
  LanguageGenConfig l2;
  AccentConfig accent;
  CorporaConfig corpora;
  TrainConfig train;
  ExperimentSection experiment;

  static ExperimentConfig defaults();
  void validate() const;  // throws ConfigError
};

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

// Canonical JSON dump (sorted keys) and its FNV-1a digest, used to stamp
// checkpoints and reports.
std::string config_to_json(const ExperimentConfig& config);
std::string config_hash_hex(const ExperimentConfig& config);

}  // namespace isib

#endif  // ISIB_CONFIG_HPP_
