// tools/main.cpp

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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "isib/checkpoint.hpp"
#include "isib/dataset.hpp"
#include "isib/error.hpp"
#include "isib/experiment.hpp"
#include "isib/train.hpp"

namespace {

namespace fs = std::filesystem;
using namespace isib;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;    // usage or config error
constexpr int kExitNumeric = 3;  // non-finite loss

struct GlobalArgs {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string data_dir;  // empty: use config
  std::string out;
};

struct CliConfig {
  ExperimentConfig cfg;
  std::string hash;  // identity of the config file, before flag overrides
};

CliConfig load_cli_config(const GlobalArgs& args) {
  CliConfig out;
  out.cfg =
      args.config_path.empty() ? ExperimentConfig::defaults() : load_config(args.config_path);
  out.hash = config_hash_hex(out.cfg);
  if (args.seed) {
    out.cfg.seed = *args.seed;
    out.cfg.train.seed = *args.seed;
  } else {
    out.cfg.train.seed = out.cfg.seed;
  }
  return out;
}

fs::path resolve_data_dir(const GlobalArgs& args, const ExperimentConfig& cfg) {
  return args.data_dir.empty() ? fs::path(cfg.paths.data_dir) : fs::path(args.data_dir);
}

void write_named_corpus(const std::vector<Utterance>& corpus, const fs::path& dir,
                        const char* name) {
  save_corpus(corpus, dir / name);
  std::cout << name << ": " << corpus.size() << " utterances\n";
}

int cmd_gen_data(const GlobalArgs& args) {
  ExperimentConfig cfg = load_cli_config(args).cfg;
  const fs::path dir = args.out.empty() ? resolve_data_dir(args, cfg) : fs::path(args.out);
  fs::create_directories(dir);

  World w = build_world(cfg, cfg.seed);
  write_named_corpus(w.l1_train, dir, "l1_train");
  write_named_corpus(w.l1_test, dir, "l1_test");
  write_named_corpus(w.l2_train, dir, "l2_train");
  write_named_corpus(w.l2_test, dir, "l2_test");
  write_named_corpus(w.accent_test, dir, "accent_test");
  write_named_corpus(w.accent_strong_test, dir, "accent_strong_test");
  write_named_corpus(w.accent_adapt, dir, "accent_adapt");
  return kExitOk;
}

struct LoadedCorpora {
  std::vector<Utterance> l1_train, l2_train;
  int32_t vocab_l1 = 0, vocab_l2 = 0;
};

LoadedCorpora load_train_corpora(const fs::path& dir) {
  LoadedCorpora c;
  c.l1_train = load_corpus(dir / "l1_train");
  c.l2_train = load_corpus(dir / "l2_train");
  c.vocab_l1 = c.l1_train.front().transcript.vocab;
  c.vocab_l2 = c.l2_train.front().transcript.vocab;
  return c;
}

Checkpoint build_init_checkpoint(const CliConfig& cli, const LoadedCorpora& corpora,
                                 const std::string& init) {
  const auto& init_corpus = init == "l1" ? corpora.l1_train : corpora.l2_train;
  return init_model(cli.cfg.train, cli.cfg.feature_dim, corpora.vocab_l1, corpora.vocab_l2,
                    init_corpus, init, cli.hash);
}

int cmd_init_centroids(const GlobalArgs& args, const std::string& init) {
  CliConfig cli = load_cli_config(args);
  const ExperimentConfig& cfg = cli.cfg;
  LoadedCorpora corpora = load_train_corpora(resolve_data_dir(args, cfg));
  Checkpoint ckpt = build_init_checkpoint(cli, corpora, init);
  save_checkpoint(ckpt, args.out);
  std::cout << "wrote " << args.out << " (stage init, codebook " << ckpt.params.codebook.k()
            << "x" << ckpt.params.codebook.dim() << ")\n";
  return kExitOk;
}

void write_loss_log(const std::vector<LossReport>& epochs, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write loss log: " + path.string());
  out << "epoch,loss,loss_asr_l1,loss_asr_l2\n";
  char line[160];
  for (size_t i = 0; i < epochs.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%.8f,%.8f,%.8f\n", i + 1, epochs[i].total,
                  epochs[i].loss_l1, epochs[i].loss_l2);
    out << line;
  }
}

int cmd_train(const GlobalArgs& args, const std::string& stage, const std::string& init,
              std::optional<float> alpha_flag, const std::string& in_path,
              std::string log_path) {
  CliConfig cli = load_cli_config(args);
  ExperimentConfig& cfg = cli.cfg;
  if (alpha_flag) cfg.train.alpha = *alpha_flag;
  LoadedCorpora corpora = load_train_corpora(resolve_data_dir(args, cfg));

  Checkpoint ckpt;
  if (!in_path.empty()) {
    ckpt = load_checkpoint(in_path);
    if (ckpt.meta.config_hash != cli.hash)
      throw StateError("checkpoint was trained under a different config (hash mismatch)");
    if (alpha_flag && *alpha_flag != ckpt.meta.alpha)
      throw ConfigError("--alpha conflicts with the checkpoint's alpha");
    if (args.seed && *args.seed != ckpt.meta.seed)
      throw ConfigError("--seed conflicts with the checkpoint's seed");
    cfg.train.alpha = ckpt.meta.alpha;
    cfg.train.seed = ckpt.meta.seed;
  } else {
    if (stage == "2") throw ConfigError("--stage 2 requires --in with a stage-1 checkpoint");
    ckpt = build_init_checkpoint(cli, corpora, init);
  }

  std::vector<LossReport> epochs;
  auto append = [&epochs](const TrainLog& log) {
    epochs.insert(epochs.end(), log.epochs.begin(), log.epochs.end());
  };

  if (stage == "1") {
    append(train_stage1(ckpt, corpora.l1_train, corpora.l2_train, cfg.train));
  } else if (stage == "2") {
    append(train_stage2(ckpt, corpora.l1_train, corpora.l2_train, cfg.train));
  } else {  // all
    append(train_stage1(ckpt, corpora.l1_train, corpora.l2_train, cfg.train));
    append(train_stage2(ckpt, corpora.l1_train, corpora.l2_train, cfg.train));
  }

  save_checkpoint(ckpt, args.out);
  if (log_path.empty())
    log_path = fs::path(args.out).replace_extension(".log.csv").string();
  write_loss_log(epochs, log_path);
  std::cout << "wrote " << args.out << " (stage " << ckpt.meta.stage << ") and " << log_path
            << "\n";
  return kExitOk;
}

void require_compatible(const Checkpoint& ckpt, const std::vector<Utterance>& corpus, Lang lang) {
  if (corpus.empty()) throw InvalidInputError("corpus is empty");
  if (corpus.front().features.dim(1) != ckpt.params.feature_dim())
    throw InvalidInputError("dataset feature dim does not match checkpoint");
  const int32_t head_vocab =
      lang == Lang::kL1 ? ckpt.params.head_l1.vocab : ckpt.params.head_l2.vocab;
  if (corpus.front().transcript.vocab != head_vocab)
    throw InvalidInputError("dataset vocab does not match checkpoint head");
}

int cmd_eval(const std::string& ckpt_path, const std::string& data, const std::string& lang_tag) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  std::vector<Utterance> corpus = load_corpus(data);
  const Lang lang = parse_lang(lang_tag);
  require_compatible(ckpt, corpus, lang);

  ErrorBreakdown total = evaluate_corpus(ckpt.params, corpus, lang);
  const nlohmann::json out = {{"substitutions", total.substitutions},
                              {"deletions", total.deletions},
                              {"insertions", total.insertions},
                              {"ref_len", total.ref_len},
                              {"rate", total.rate()},
                              {"utterances", corpus.size()}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_tokenize(const std::string& ckpt_path, const std::string& data, const std::string& out_path) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  std::vector<Utterance> corpus = load_corpus(data);
  if (corpus.empty() || corpus.front().features.dim(1) != ckpt.params.feature_dim())
    throw InvalidInputError("dataset feature dim does not match checkpoint");

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write tokens: " + out_path);
  for (const Utterance& utt : corpus) {
    const std::vector<int32_t> tokens = tokenize(utt, ckpt.params);
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) out << ' ';
      out << tokens[i];
    }
    out << '\n';
  }
  std::cout << "wrote " << out_path << " (" << corpus.size() << " lines)\n";
  return kExitOk;
}

int cmd_experiment(const GlobalArgs& args, const std::string& scenario) {
  ExperimentConfig cfg = load_cli_config(args).cfg;
  if (args.seed) cfg.experiment.seeds = {*args.seed};
  const fs::path out_dir = args.out.empty() ? fs::path(cfg.paths.output_dir) : fs::path(args.out);
  run_experiment_command(cfg, scenario != "accent-adapted", scenario != "native-only", out_dir);
  std::cout << "reports written under " << out_dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accent-robust discrete-token speech recognition sandbox"};
  app.require_subcommand(1);

  GlobalArgs args;
  std::optional<uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "Override the config seed");
  app.fallthrough();  // lets subcommands accept the global --seed

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic corpora");
  gen->add_option("--config", args.config_path, "Config JSON path");
  gen->add_option("--out", args.out, "Output directory (default: config paths.data_dir)");

  // init-centroids
  std::string init = "l1";
  auto* initc = app.add_subcommand("init-centroids", "Fit the vanilla k-means codebook");
  initc->add_option("--config", args.config_path, "Config JSON path");
  initc->add_option("--data", args.data_dir, "Dataset directory");
  initc->add_option("--init", init, "Codebook init language")
      ->check(CLI::IsMember({"l1", "l2"}));
  initc->add_option("--out", args.out, "Checkpoint path")->required();

  // train
  std::string stage = "all";
  std::optional<float> alpha_flag;
  std::string in_path, log_path;
  auto* train = app.add_subcommand("train", "Run the two-stage training schedule");
  train->add_option("--config", args.config_path, "Config JSON path");
  train->add_option("--data", args.data_dir, "Dataset directory");
  train->add_option("--stage", stage, "Which stage to run")
      ->check(CLI::IsMember({"1", "2", "all"}));
  train->add_option("--init", init, "Codebook init language")
      ->check(CLI::IsMember({"l1", "l2"}));
  train->add_option("--alpha", alpha_flag, "Multi-task weight of the L1 loss");
  train->add_option("--in", in_path, "Input checkpoint (required for --stage 2)");
  train->add_option("--out", args.out, "Output checkpoint path")->required();
  train->add_option("--log", log_path, "Per-epoch loss CSV (default: alongside --out)");

  // eval
  std::string ckpt_path, lang_tag = "l2";
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset");
  eval->add_option("--ckpt", ckpt_path, "Checkpoint path")->required();
  eval->add_option("--data", args.data_dir, "Corpus directory")->required();
  eval->add_option("--lang", lang_tag, "Which recognizer head")
      ->check(CLI::IsMember({"l1", "l2"}));

  // tokenize
  auto* tok = app.add_subcommand("tokenize", "Emit hard token ids for a dataset");
  tok->add_option("--ckpt", ckpt_path, "Checkpoint path")->required();
  tok->add_option("--data", args.data_dir, "Corpus directory")->required();
  tok->add_option("--out", args.out, "Token file path")->required();

  // experiment
  std::string scenario = "all";
  auto* exp = app.add_subcommand("experiment", "Run the full report tables");
  exp->add_option("--config", args.config_path, "Config JSON path");
  exp->add_option("--scenario", scenario, "Which driver to run")
      ->check(CLI::IsMember({"native-only", "accent-adapted", "all"}));
  exp->add_option("--out", args.out, "Output directory (default: config paths.output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  args.seed = seed_flag;
  try {
    if (gen->parsed()) return cmd_gen_data(args);
    if (initc->parsed()) return cmd_init_centroids(args, init);
    if (train->parsed()) return cmd_train(args, stage, init, alpha_flag, in_path, log_path);
    if (eval->parsed()) return cmd_eval(ckpt_path, args.data_dir, lang_tag);
    if (tok->parsed()) return cmd_tokenize(ckpt_path, args.data_dir, args.out);
    if (exp->parsed()) return cmd_experiment(args, scenario);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
