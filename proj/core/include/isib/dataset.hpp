// core/include/isib/dataset.hpp

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

#ifndef ISIB_DATASET_HPP_
#define ISIB_DATASET_HPP_

#include <filesystem>
#include <vector>

#include "isib/synthlang.hpp"

namespace isib {

// On-disk corpus layout, one directory per corpus:
//   index.json       corpus metadata plus one entry per utterance
//   transcripts.txt  space-separated integer labels, one line per utterance
//   utt_NNNNNN.f32   raw little-endian float32 frames, row-major T x D
// Feature bytes round-trip exactly.
void save_corpus(const std::vector<Utterance>& corpus, const std::filesystem::path& dir);
std::vector<Utterance> load_corpus(const std::filesystem::path& dir);

}  // namespace isib

#endif  // ISIB_DATASET_HPP_
