// core/include/isib/checkpoint.hpp

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

#ifndef ISIB_CHECKPOINT_HPP_
#define ISIB_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "isib/model.hpp"

namespace isib {

struct CheckpointMeta {
  int format_version = 1;
  std::string stage;          // "init", "stage1" or "stage2"
  std::string init_language;  // "l1" or "l2"
  float alpha = 0.0f;
  float tau = 1.0f;
  uint64_t seed = 0;
  std::string config_hash;    // hex digest of the originating config
};

struct Checkpoint {
  CheckpointMeta meta;
  ModelParams params;
};

// Single file: magic, little-endian manifest length, canonical JSON manifest
// (shapes and names in ModelParams order), then the raw float32 blob in the
// same order. save(load(f)) reproduces f byte for byte.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace isib

#endif  // ISIB_CHECKPOINT_HPP_
