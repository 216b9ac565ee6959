// tests/test_io.cpp

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

#include <doctest.h>

#include <bit>
#include <fstream>

#include "isib/checkpoint.hpp"
#include "isib/dataset.hpp"
#include "isib/error.hpp"
#include "isib/experiment.hpp"
#include "isib/train.hpp"
#include "test_helpers.hpp"

using namespace isib;

TEST_SUITE("checkpoint") {

TEST_CASE("save-load-save is byte identical") {
  test::TempDir dir("ckpt_roundtrip");
  World w = build_world(test::tiny_config(), 1);
  TrainConfig tc = test::tiny_config().train;
  tc.seed = 1;
  Checkpoint ckpt = init_model(tc, 8, w.l1.vocab(), w.l2.vocab(), w.l1_train, "l1", "deadbeef");

  const auto first = dir.path() / "a.ckpt";
  const auto second = dir.path() / "b.ckpt";
  save_checkpoint(ckpt, first);
  Checkpoint loaded = load_checkpoint(first);
  save_checkpoint(loaded, second);
  CHECK(test::files_identical(first, second));

  CHECK(loaded.meta.stage == "init");
  CHECK(loaded.meta.init_language == "l1");
  CHECK(loaded.meta.config_hash == "deadbeef");
  CHECK(loaded.params.codebook.k() == tc.k);
  auto pa = ckpt.params.tensors();
  auto pb = loaded.params.tensors();
  for (size_t i = 0; i < pa.size(); ++i)
    for (int64_t j = 0; j < pa[i]->numel(); ++j)
      CHECK(std::bit_cast<uint32_t>(pa[i]->at(j)) == std::bit_cast<uint32_t>(pb[i]->at(j)));
}

TEST_CASE("corrupt files are rejected") {
  test::TempDir dir("ckpt_bad");
  const auto path = dir.path() / "bad.ckpt";
  std::ofstream(path) << "not a checkpoint";
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "missing.ckpt"), IoError);
}

}  // TEST_SUITE

TEST_SUITE("dataset") {

TEST_CASE("corpus round trip preserves features exactly") {
  test::TempDir dir("corpus_roundtrip");
  LanguageSpec spec;
  spec.tag = "t";
  spec.phones = 5;
  spec.words = 6;
  spec.feature_dim = 4;
  Language lang = make_language(spec, Rng(2));
  std::vector<Utterance> corpus = sample_corpus(lang, 12, {2, 3}, Rng(3));

  save_corpus(corpus, dir.path() / "c");
  std::vector<Utterance> loaded = load_corpus(dir.path() / "c");
  REQUIRE(loaded.size() == corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    CHECK(loaded[i].transcript.labels == corpus[i].transcript.labels);
    CHECK(loaded[i].transcript.vocab == corpus[i].transcript.vocab);
    CHECK(loaded[i].group == corpus[i].group);
    CHECK(loaded[i].language == corpus[i].language);
    REQUIRE(loaded[i].features.shape() == corpus[i].features.shape());
    for (int64_t j = 0; j < corpus[i].features.numel(); ++j)
      CHECK(std::bit_cast<uint32_t>(loaded[i].features.at(j)) ==
            std::bit_cast<uint32_t>(corpus[i].features.at(j)));
  }

  // Saving the same corpus twice produces identical files.
  save_corpus(corpus, dir.path() / "c2");
  CHECK(test::files_identical(dir.path() / "c" / "index.json", dir.path() / "c2" / "index.json"));
  CHECK(test::files_identical(dir.path() / "c" / "transcripts.txt",
                              dir.path() / "c2" / "transcripts.txt"));
  CHECK(test::files_identical(dir.path() / "c" / "utt_000000.f32",
                              dir.path() / "c2" / "utt_000000.f32"));
}

TEST_CASE("missing corpus raises IoError") {
  test::TempDir dir("corpus_missing");
  CHECK_THROWS_AS(load_corpus(dir.path() / "nope"), IoError);
}

}  // TEST_SUITE

TEST_SUITE("config") {

TEST_CASE("defaults validate and hash deterministically") {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.validate();
  CHECK(config_hash_hex(cfg) == config_hash_hex(ExperimentConfig::defaults()));
  CHECK(config_hash_hex(cfg).size() == 16);
  ExperimentConfig other = ExperimentConfig::defaults();
  other.seed = 99;
  CHECK(config_hash_hex(cfg) != config_hash_hex(other));
}

TEST_CASE("partial files override defaults; unknown keys are rejected") {
  test::TempDir dir("config");
  const auto path = dir.path() / "cfg.json";
  std::ofstream(path) << R"({"seed": 17, "train": {"alpha": 0.5}})";
  ExperimentConfig cfg = load_config(path);
  CHECK(cfg.seed == 17);
  CHECK(cfg.train.alpha == 0.5f);
  CHECK(cfg.train.k == ExperimentConfig::defaults().train.k);

  std::ofstream(path) << R"({"seeed": 17})";
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::ofstream(path) << R"({"train": {"alhpa": 0.5}})";
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::ofstream(path) << R"({"train": {"alpha": 1.5}})";
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::ofstream(path) << R"({"train": {"alpha": "x"}})";
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("save and reload reproduce the config") {
  test::TempDir dir("config_save");
  ExperimentConfig cfg = test::tiny_config();
  const auto path = dir.path() / "cfg.json";
  save_config(cfg, path);
  ExperimentConfig loaded = load_config(path);
  CHECK(config_hash_hex(loaded) == config_hash_hex(cfg));
}

}  // TEST_SUITE
