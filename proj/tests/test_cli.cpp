// tests/test_cli.cpp

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

#ifdef ISIBKIT_CLI_PATH

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "isib/checkpoint.hpp"
#include "isib/config.hpp"
#include "isib/dataset.hpp"
#include "test_helpers.hpp"

using namespace isib;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ISIBKIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// A shared fixture: smoke config + generated data, reused across cases.
struct CliWorkspace {
  test::TempDir dir{"cli"};
  std::filesystem::path config_path;
  std::filesystem::path data_dir;

  CliWorkspace() {
    ExperimentConfig cfg = test::tiny_config();
    config_path = dir.path() / "config.json";
    data_dir = dir.path() / "data";
    save_config(cfg, config_path);
    REQUIRE(run_cli("gen-data --config " + q(config_path) + " --out " + q(data_dir)) == 0);
  }
};

CliWorkspace& workspace() {
  static CliWorkspace ws;
  return ws;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen-data is reproducible and matches configured sizes") {
  CliWorkspace& ws = workspace();
  test::TempDir other("cli_gen2");
  REQUIRE(run_cli("gen-data --config " + q(ws.config_path) + " --out " + q(other.path())) == 0);

  for (const char* name : {"l1_train", "l2_train", "accent_test"}) {
    CHECK(test::files_identical(ws.data_dir / name / "index.json",
                                other.path() / name / "index.json"));
    CHECK(test::files_identical(ws.data_dir / name / "transcripts.txt",
                                other.path() / name / "transcripts.txt"));
    CHECK(test::files_identical(ws.data_dir / name / "utt_000000.f32",
                                other.path() / name / "utt_000000.f32"));
  }

  ExperimentConfig cfg = test::tiny_config();
  CHECK(load_corpus(ws.data_dir / "l1_train").size() ==
        static_cast<size_t>(cfg.corpora.train_utts));
  CHECK(load_corpus(ws.data_dir / "accent_adapt").size() ==
        static_cast<size_t>(cfg.corpora.adapt_utts));
}

TEST_CASE("bad configs and bad paths exit with code 2") {
  CliWorkspace& ws = workspace();
  const auto bad = ws.dir.path() / "bad.json";
  std::ofstream(bad) << R"({"unknown_key": 1})";
  CHECK(run_cli("gen-data --config " + q(bad)) == 2);
  CHECK(run_cli("gen-data --config " + q(ws.dir.path() / "missing.json")) == 2);
  CHECK(run_cli("train --out /tmp/x.ckpt --data " + q(ws.dir.path() / "nodata")) == 2);
  CHECK(run_cli("definitely-not-a-command") == 2);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("train writes a checkpoint whose alpha-0 log tracks the L2 loss") {
  CliWorkspace& ws = workspace();
  const auto ckpt_path = ws.dir.path() / "a0.ckpt";
  const auto log_path = ws.dir.path() / "a0.log.csv";
  REQUIRE(run_cli("train --config " + q(ws.config_path) + " --data " + q(ws.data_dir) +
                  " --stage all --init l2 --alpha 0 --out " + q(ckpt_path) + " --log " +
                  q(log_path)) == 0);

  Checkpoint ckpt = load_checkpoint(ckpt_path);
  CHECK(ckpt.meta.stage == "stage2");
  CHECK(ckpt.meta.config_hash == config_hash_hex(test::tiny_config()));

  std::ifstream log(log_path);
  std::string line;
  REQUIRE(std::getline(log, line));
  CHECK(line == "epoch,loss,loss_asr_l1,loss_asr_l2");
  int rows = 0;
  while (std::getline(log, line)) {
    std::stringstream ss(line);
    std::string epoch, total, l1, l2;
    std::getline(ss, epoch, ',');
    std::getline(ss, total, ',');
    std::getline(ss, l1, ',');
    std::getline(ss, l2, ',');
    CHECK(total == l2);
    CHECK(std::stod(l1) == 0.0);
    ++rows;
  }
  ExperimentConfig cfg = test::tiny_config();
  CHECK(rows == cfg.train.stage1_epochs + cfg.train.stage2_epochs);
}

TEST_CASE("stage 1 then stage 2 equals stage all byte for byte") {
  CliWorkspace& ws = workspace();
  const auto all_path = ws.dir.path() / "all.ckpt";
  const auto s1_path = ws.dir.path() / "s1.ckpt";
  const auto s2_path = ws.dir.path() / "s2.ckpt";
  const std::string base =
      "train --config " + q(ws.config_path) + " --data " + q(ws.data_dir) + " --init l1 --alpha 0.3 ";
  REQUIRE(run_cli(base + "--stage all --out " + q(all_path)) == 0);
  REQUIRE(run_cli(base + "--stage 1 --out " + q(s1_path)) == 0);
  REQUIRE(run_cli("train --config " + q(ws.config_path) + " --data " + q(ws.data_dir) +
                  " --stage 2 --in " + q(s1_path) + " --out " + q(s2_path)) == 0);
  CHECK(test::files_identical(all_path, s2_path));

  // Stage 2 without an input checkpoint, or under a different config, fails.
  CHECK(run_cli(base + "--stage 2 --out /tmp/nope.ckpt") == 2);
  ExperimentConfig other = test::tiny_config();
  other.train.tau = 0.5f;
  const auto other_path = ws.dir.path() / "other.json";
  save_config(other, other_path);
  CHECK(run_cli("train --config " + q(other_path) + " --data " + q(ws.data_dir) +
                " --stage 2 --in " + q(s1_path) + " --out /tmp/nope.ckpt") == 2);
}

TEST_CASE("tokenize writes one line per utterance with ids inside the codebook") {
  CliWorkspace& ws = workspace();
  const auto ckpt_path = ws.dir.path() / "a0.ckpt";  // written by the train case
  REQUIRE(std::filesystem::exists(ckpt_path));
  const auto tokens_path = ws.dir.path() / "tokens.txt";
  REQUIRE(run_cli("tokenize --ckpt " + q(ckpt_path) + " --data " + q(ws.data_dir / "accent_test") +
                  " --out " + q(tokens_path)) == 0);

  ExperimentConfig cfg = test::tiny_config();
  std::ifstream tokens(tokens_path);
  std::string line;
  int lines = 0;
  while (std::getline(tokens, line)) {
    std::stringstream ss(line);
    int64_t id;
    while (ss >> id) {
      CHECK(id >= 0);
      CHECK(id < cfg.train.k);
    }
    ++lines;
  }
  CHECK(lines == cfg.corpora.test_utts);
}

TEST_CASE("eval prints a JSON breakdown and rejects mismatched dimensions") {
  CliWorkspace& ws = workspace();
  const auto ckpt_path = ws.dir.path() / "a0.ckpt";
  REQUIRE(std::filesystem::exists(ckpt_path));

  const std::string cmd = std::string(ISIBKIT_CLI_PATH) + " eval --ckpt " + q(ckpt_path) +
                          " --data " + q(ws.data_dir / "l2_test") + " --lang l2 > " +
                          q(ws.dir.path() / "eval.json") + " 2>/dev/null";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  std::ifstream in(ws.dir.path() / "eval.json");
  nlohmann::json j;
  in >> j;
  CHECK(j.contains("substitutions"));
  CHECK(j.contains("rate"));
  CHECK(j.at("ref_len").get<int64_t>() > 0);

  // The L1 test set has a different vocab than the L2 head.
  CHECK(run_cli("eval --ckpt " + q(ckpt_path) + " --data " + q(ws.data_dir / "l1_test") +
                " --lang l2") == 2);
}

TEST_CASE("training-set error does not exceed held-out error (median over seeds)") {
  CliWorkspace& ws = workspace();
  std::vector<double> train_rates, test_rates;
  for (int seed = 1; seed <= 5; ++seed) {
    const auto ckpt_path = ws.dir.path() / ("gap_seed" + std::to_string(seed) + ".ckpt");
    REQUIRE(run_cli("train --config " + q(ws.config_path) + " --data " + q(ws.data_dir) +
                    " --seed " + std::to_string(seed) + " --stage all --init l2 --alpha 0 --out " +
                    q(ckpt_path)) == 0);
    auto eval_rate = [&](const char* corpus) {
      const auto out = ws.dir.path() / "gap_eval.json";
      const std::string cmd = std::string(ISIBKIT_CLI_PATH) + " eval --ckpt " + q(ckpt_path) +
                              " --data " + q(ws.data_dir / corpus) + " --lang l2 > " + q(out) +
                              " 2>/dev/null";
      REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
      std::ifstream in(out);
      nlohmann::json j;
      in >> j;
      return j.at("rate").get<double>();
    };
    train_rates.push_back(eval_rate("l2_train"));
    test_rates.push_back(eval_rate("l2_test"));
  }
  auto med = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  CHECK(med(train_rates) <= med(test_rates));
}

}  // TEST_SUITE

#endif  // ISIBKIT_CLI_PATH
