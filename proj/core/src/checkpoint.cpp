// core/src/checkpoint.cpp

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

#include "isib/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "isib/error.hpp"

namespace isib {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'I', 'S', 'I', 'B', 'C', 'K', 'P', '1'};

void write_u64_le(std::ostream& out, uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

uint64_t read_u64_le(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_f32_le(std::ostream& out, std::span<const float> values) {
  std::vector<char> buf(values.size() * 4);
  for (size_t i = 0; i < values.size(); ++i) {
    const uint32_t bits = std::bit_cast<uint32_t>(values[i]);
    buf[4 * i + 0] = static_cast<char>(bits & 0xFF);
    buf[4 * i + 1] = static_cast<char>((bits >> 8) & 0xFF);
    buf[4 * i + 2] = static_cast<char>((bits >> 16) & 0xFF);
    buf[4 * i + 3] = static_cast<char>((bits >> 24) & 0xFF);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void read_f32_le(std::istream& in, std::span<float> values) {
  std::vector<unsigned char> buf(values.size() * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  for (size_t i = 0; i < values.size(); ++i) {
    const uint32_t bits = static_cast<uint32_t>(buf[4 * i]) |
                          (static_cast<uint32_t>(buf[4 * i + 1]) << 8) |
                          (static_cast<uint32_t>(buf[4 * i + 2]) << 16) |
                          (static_cast<uint32_t>(buf[4 * i + 3]) << 24);
    values[i] = std::bit_cast<float>(bits);
  }
}

json manifest_json(const Checkpoint& ckpt) {
  json tensors = json::array();
  const auto ptrs = ckpt.params.tensors();
  const auto& names = ModelParams::tensor_names();
  for (size_t i = 0; i < ptrs.size(); ++i)
    tensors.push_back({{"name", names[i]}, {"shape", ptrs[i]->shape()}});
  return json{{"format_version", ckpt.meta.format_version},
              {"stage", ckpt.meta.stage},
              {"init_language", ckpt.meta.init_language},
              {"alpha", ckpt.meta.alpha},
              {"tau", ckpt.meta.tau},
              {"seed", ckpt.meta.seed},
              {"config_hash", ckpt.meta.config_hash},
              {"context", ckpt.params.encoder.context},
              {"vocab_l1", ckpt.params.head_l1.vocab},
              {"vocab_l2", ckpt.params.head_l2.vocab},
              {"tensors", tensors}};
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());

  const std::string manifest = manifest_json(ckpt).dump();
  out.write(kMagic, sizeof(kMagic));
  write_u64_le(out, manifest.size());
  out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
  for (const Tensor* t : ckpt.params.tensors()) write_f32_le(out, t->values());
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());

  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("not an isibkit checkpoint: " + path.string());
  const uint64_t len = read_u64_le(in);
  std::string manifest(len, '\0');
  in.read(manifest.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError("truncated checkpoint manifest: " + path.string());

  json j;
  try {
    j = json::parse(manifest);
  } catch (const json::exception& e) {
    throw IoError("bad checkpoint manifest: " + std::string(e.what()));
  }

  Checkpoint ckpt;
  try {
    ckpt.meta.format_version = j.at("format_version").get<int>();
    ckpt.meta.stage = j.at("stage").get<std::string>();
    ckpt.meta.init_language = j.at("init_language").get<std::string>();
    ckpt.meta.alpha = j.at("alpha").get<float>();
    ckpt.meta.tau = j.at("tau").get<float>();
    ckpt.meta.seed = j.at("seed").get<uint64_t>();
    ckpt.meta.config_hash = j.at("config_hash").get<std::string>();
    ckpt.params.tau = ckpt.meta.tau;
    ckpt.params.encoder.context = j.at("context").get<int>();
    ckpt.params.head_l1.vocab = j.at("vocab_l1").get<int32_t>();
    ckpt.params.head_l2.vocab = j.at("vocab_l2").get<int32_t>();

    const json& tensors = j.at("tensors");
    const auto& names = ModelParams::tensor_names();
    if (tensors.size() != names.size()) throw IoError("manifest tensor count mismatch");
    auto ptrs = ckpt.params.tensors();
    for (size_t i = 0; i < names.size(); ++i) {
      if (tensors[i].at("name").get<std::string>() != names[i])
        throw IoError("manifest tensor order mismatch at " + names[i]);
      *ptrs[i] = Tensor(tensors[i].at("shape").get<std::vector<int64_t>>());
      read_f32_le(in, ptrs[i]->values());
    }
  } catch (const json::exception& e) {
    throw IoError("bad checkpoint manifest: " + std::string(e.what()));
  }
  if (!in) throw IoError("truncated checkpoint blob: " + path.string());
  return ckpt;
}

}  // namespace isib
