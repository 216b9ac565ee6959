// core/include/isib/synthlang.hpp

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

#ifndef ISIB_SYNTHLANG_HPP_
#define ISIB_SYNTHLANG_HPP_

#include <string>
#include <utility>
#include <vector>

#include "isib/ctc.hpp"
#include "isib/rng.hpp"
#include "isib/tensor.hpp"

namespace isib {

struct Phone {
  std::vector<float> mean;  // emission mean in feature space
  float stdev = 0.25f;      // isotropic emission deviation
  int mean_duration = 6;    // frames
  int duration_jitter = 1;  // +- uniform jitter, duration stays >= 1
};

// A generative toy language: a Gaussian phone inventory plus a lexicon of
// phone strings. Word labels are the lexicon indices shifted by one (label 0
// stays the CTC blank), so the label alphabet size equals the word count.
struct Language {
  std::string tag;
  int feature_dim = 0;
  std::vector<Phone> phones;
  std::vector<std::vector<int>> lexicon;
  float accent_strength = 0.0f;  // 0 for native speech

  int32_t vocab() const { return static_cast<int32_t>(lexicon.size()); }
};

struct LanguageSpec {
  std::string tag;
  int phones = 10;
  int words = 12;
  int feature_dim = 8;
  float separation = 4.0f;  // min pairwise mean distance, in units of stdev
  float emission_stdev = 0.25f;
  int mean_duration = 6;
  int duration_jitter = 1;
};

// Draws the phone inventory with rejection until all pairwise mean distances
// reach separation * stdev, then a lexicon of distinct words of 2..4 phones
// in which no word contains another as a contiguous substring. Raises
// GenerationError when the retry budget runs out.
Language make_language(const LanguageSpec& spec, Rng rng);

// Accent recipe: speak the source language with every phone pulled toward its
// nearest counterpart in the substrate inventory.
struct AccentSpec {
  Language source;          // the language being spoken (L2)
  Language substrate;       // the speaker's native inventory (L1)
  float strength = 0.0f;    // 0 = native, 1 = fully substituted
  std::vector<int> phone_map;  // source phone -> nearest substrate phone
};

// Nearest-mean map from every phone of src to a phone of dst (ties to the
// lowest index).
std::vector<int> map_phones(const Language& src, const Language& dst);

AccentSpec make_accent_spec(Language source, Language substrate, float strength);

// Same lexicon and labels as the source; phone means interpolated as
// (1-s) * source + s * mapped substrate.
Language derive_accented(const AccentSpec& spec);

struct Utterance {
  Tensor features;  // T x D
  LabelSequence transcript;
  std::string language;
  float accent_strength = 0.0f;
  int group = 0;  // pseudo-speaker bucket used for held-out splits
};

// Word sequences drawn uniformly with replacement, expanded to phone strings,
// each phone emitting a jittered number of N(mean, stdev^2 I) frames. Every
// utterance satisfies the CTC feasibility bound by construction.
std::vector<Utterance> sample_corpus(const Language& lang, int n_utts,
                                     std::pair<int, int> words_per_utt, Rng rng);

}  // namespace isib

#endif  // ISIB_SYNTHLANG_HPP_
