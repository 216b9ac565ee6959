// core/src/dataset.cpp

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

#include "isib/dataset.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "isib/error.hpp"

namespace isib {

namespace {

using nlohmann::json;

std::string utt_id(int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "utt_%06lld", static_cast<long long>(i));
  return buf;
}

void write_features(const std::filesystem::path& path, const Tensor& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write features: " + path.string());
  std::vector<char> buf(static_cast<size_t>(features.numel()) * 4);
  auto values = features.values();
  for (size_t i = 0; i < values.size(); ++i) {
    const uint32_t bits = std::bit_cast<uint32_t>(values[i]);
    buf[4 * i + 0] = static_cast<char>(bits & 0xFF);
    buf[4 * i + 1] = static_cast<char>((bits >> 8) & 0xFF);
    buf[4 * i + 2] = static_cast<char>((bits >> 16) & 0xFF);
    buf[4 * i + 3] = static_cast<char>((bits >> 24) & 0xFF);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing features: " + path.string());
}

Tensor read_features(const std::filesystem::path& path, int64_t frames, int64_t dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read features: " + path.string());
  std::vector<unsigned char> buf(static_cast<size_t>(frames * dim) * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw IoError("truncated features file: " + path.string());
  std::vector<float> values(static_cast<size_t>(frames * dim));
  for (size_t i = 0; i < values.size(); ++i) {
    const uint32_t bits = static_cast<uint32_t>(buf[4 * i]) |
                          (static_cast<uint32_t>(buf[4 * i + 1]) << 8) |
                          (static_cast<uint32_t>(buf[4 * i + 2]) << 16) |
                          (static_cast<uint32_t>(buf[4 * i + 3]) << 24);
    values[i] = std::bit_cast<float>(bits);
  }
  return Tensor::from({frames, dim}, std::move(values));
}

}  // namespace

void save_corpus(const std::vector<Utterance>& corpus, const std::filesystem::path& dir) {
  if (corpus.empty()) throw InvalidInputError("save_corpus: empty corpus");
  std::filesystem::create_directories(dir);

  json utts = json::array();
  std::ofstream transcripts(dir / "transcripts.txt");
  if (!transcripts) throw IoError("cannot write transcripts: " + (dir / "transcripts.txt").string());

  for (size_t i = 0; i < corpus.size(); ++i) {
    const Utterance& u = corpus[i];
    const std::string id = utt_id(static_cast<int64_t>(i));
    write_features(dir / (id + ".f32"), u.features);
    utts.push_back({{"id", id},
                    {"frames", u.features.dim(0)},
                    {"group", u.group},
                    {"labels", u.transcript.length()}});
    for (size_t l = 0; l < u.transcript.labels.size(); ++l) {
      if (l) transcripts << ' ';
      transcripts << u.transcript.labels[l];
    }
    transcripts << '\n';
  }

  const json index = {{"format_version", 1},
                      {"language", corpus.front().language},
                      {"accent_strength", corpus.front().accent_strength},
                      {"feature_dim", corpus.front().features.dim(1)},
                      {"vocab", corpus.front().transcript.vocab},
                      {"n_utts", corpus.size()},
                      {"utterances", utts}};
  std::ofstream out(dir / "index.json");
  if (!out) throw IoError("cannot write index: " + (dir / "index.json").string());
  out << index.dump(2) << "\n";
}

std::vector<Utterance> load_corpus(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.json");
  if (!in) throw IoError("cannot open corpus index: " + (dir / "index.json").string());
  json index;
  try {
    in >> index;
  } catch (const json::exception& e) {
    throw IoError("bad corpus index: " + std::string(e.what()));
  }

  std::ifstream transcripts(dir / "transcripts.txt");
  if (!transcripts) throw IoError("cannot open transcripts: " + (dir / "transcripts.txt").string());

  std::vector<Utterance> corpus;
  try {
    const std::string language = index.at("language").get<std::string>();
    const float accent = index.at("accent_strength").get<float>();
    const int64_t dim = index.at("feature_dim").get<int64_t>();
    const int32_t vocab = index.at("vocab").get<int32_t>();
    for (const json& entry : index.at("utterances")) {
      Utterance u;
      u.language = language;
      u.accent_strength = accent;
      u.group = entry.at("group").get<int>();
      u.transcript.vocab = vocab;
      const int64_t frames = entry.at("frames").get<int64_t>();
      u.features = read_features(dir / (entry.at("id").get<std::string>() + ".f32"), frames, dim);

      std::string line;
      if (!std::getline(transcripts, line))
        throw IoError("transcripts.txt has fewer lines than the index");
      std::istringstream ls(line);
      int32_t label;
      while (ls >> label) u.transcript.labels.push_back(label);
      if (u.transcript.length() != entry.at("labels").get<int64_t>())
        throw IoError("transcript length mismatch for " + entry.at("id").get<std::string>());
      corpus.push_back(std::move(u));
    }
  } catch (const json::exception& e) {
    throw IoError("bad corpus index: " + std::string(e.what()));
  }
  return corpus;
}

}  // namespace isib
