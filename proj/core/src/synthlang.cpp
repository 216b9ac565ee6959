// core/src/synthlang.cpp

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

#include "isib/synthlang.hpp"

#include <algorithm>
#include <cmath>

#include "isib/error.hpp"

namespace isib {

namespace {

double mean_dist(const std::vector<float>& a, const std::vector<float>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

bool contains_subword(const std::vector<int>& big, const std::vector<int>& small) {
  if (small.size() > big.size()) return false;
  for (size_t start = 0; start + small.size() <= big.size(); ++start) {
    if (std::equal(small.begin(), small.end(), big.begin() + static_cast<long>(start)))
      return true;
  }
  return false;
}

}  // namespace

Language make_language(const LanguageSpec& spec, Rng rng) {
  if (spec.phones < 2 || spec.words < 2)
    throw InvalidInputError("make_language: need at least 2 phones and 2 words");
  if (spec.feature_dim < 1) throw InvalidInputError("make_language: feature_dim must be >= 1");
  if (spec.mean_duration < 1) throw InvalidInputError("make_language: duration must be >= 1");

  Language lang;
  lang.tag = spec.tag;
  lang.feature_dim = spec.feature_dim;

  // Phone means ~ N(0, I), rejected until pairwise separation holds.
  const double min_dist = static_cast<double>(spec.separation) * spec.emission_stdev;
  Rng phone_rng = rng.child("phones");
  const int budget = 200 * spec.phones;
  int attempts = 0;
  while (static_cast<int>(lang.phones.size()) < spec.phones) {
    if (++attempts > budget)
      throw GenerationError("make_language: could not place " + std::to_string(spec.phones) +
                            " phone means at separation " + std::to_string(spec.separation) +
                            "; lower the separation");
    std::vector<float> mean(static_cast<size_t>(spec.feature_dim));
    for (float& v : mean) v = phone_rng.normal();
    bool ok = true;
    for (const Phone& p : lang.phones)
      if (mean_dist(mean, p.mean) < min_dist) {
        ok = false;
        break;
      }
    if (!ok) continue;
    Phone p;
    p.mean = std::move(mean);
    p.stdev = spec.emission_stdev;
    p.mean_duration = spec.mean_duration;
    p.duration_jitter = spec.duration_jitter;
    lang.phones.push_back(std::move(p));
  }

  // Lexicon: distinct words of 2..4 phones; also reject substring containment
  // so no word can be mistaken for a fragment of another.
  Rng word_rng = rng.child("lexicon");
  attempts = 0;
  const int word_budget = 1000 * spec.words;
  while (static_cast<int>(lang.lexicon.size()) < spec.words) {
    if (++attempts > word_budget)
      throw GenerationError("make_language: could not draw " + std::to_string(spec.words) +
                            " distinct words over " + std::to_string(spec.phones) + " phones");
    const int len = 2 + static_cast<int>(word_rng.bounded(3));
    std::vector<int> word(static_cast<size_t>(len));
    for (int& ph : word) ph = static_cast<int>(word_rng.bounded(static_cast<uint64_t>(spec.phones)));
    bool ok = true;
    for (const auto& existing : lang.lexicon)
      if (contains_subword(existing, word) || contains_subword(word, existing)) {
        ok = false;
        break;
      }
    if (ok) lang.lexicon.push_back(std::move(word));
  }
  return lang;
}

std::vector<int> map_phones(const Language& src, const Language& dst) {
  if (src.feature_dim != dst.feature_dim)
    throw InvalidInputError("map_phones: feature dims differ");
  std::vector<int> map(src.phones.size(), 0);
  for (size_t i = 0; i < src.phones.size(); ++i) {
    double best = mean_dist(src.phones[i].mean, dst.phones[0].mean);
    for (size_t j = 1; j < dst.phones.size(); ++j) {
      const double d = mean_dist(src.phones[i].mean, dst.phones[j].mean);
      if (d < best) {
        best = d;
        map[i] = static_cast<int>(j);
      }
    }
  }
  return map;
}

AccentSpec make_accent_spec(Language source, Language substrate, float strength) {
  if (!(strength >= 0.0f && strength <= 1.0f))
    throw InvalidInputError("accent strength must lie in [0, 1]");
  AccentSpec spec;
  spec.phone_map = map_phones(source, substrate);
  spec.source = std::move(source);
  spec.substrate = std::move(substrate);
  spec.strength = strength;
  return spec;
}

Language derive_accented(const AccentSpec& spec) {
  Language out = spec.source;
  out.accent_strength = spec.strength;
  out.tag = spec.source.tag + "_acc";
  const float s = spec.strength;
  for (size_t i = 0; i < out.phones.size(); ++i) {
    const auto& target = spec.substrate.phones[static_cast<size_t>(spec.phone_map[i])].mean;
    auto& mean = out.phones[i].mean;
    for (size_t cdim = 0; cdim < mean.size(); ++cdim)
      mean[cdim] = (1.0f - s) * spec.source.phones[i].mean[cdim] + s * target[cdim];
  }
  return out;
}

std::vector<Utterance> sample_corpus(const Language& lang, int n_utts,
                                     std::pair<int, int> words_per_utt, Rng rng) {
  if (n_utts < 1) throw InvalidInputError("sample_corpus: n_utts must be >= 1");
  if (words_per_utt.first < 1 || words_per_utt.second < words_per_utt.first)
    throw InvalidInputError("sample_corpus: bad words-per-utterance range");

  std::vector<Utterance> corpus;
  corpus.reserve(static_cast<size_t>(n_utts));
  for (int u = 0; u < n_utts; ++u) {
    Rng utt_rng = rng.child(static_cast<uint64_t>(u));
    const int n_words = words_per_utt.first +
                        static_cast<int>(utt_rng.bounded(
                            static_cast<uint64_t>(words_per_utt.second - words_per_utt.first + 1)));

    Utterance utt;
    utt.language = lang.tag;
    utt.accent_strength = lang.accent_strength;
    utt.group = u % 10;
    utt.transcript.vocab = lang.vocab();

    std::vector<int> phone_string;
    for (int w = 0; w < n_words; ++w) {
      const int word = static_cast<int>(utt_rng.bounded(static_cast<uint64_t>(lang.vocab())));
      utt.transcript.labels.push_back(static_cast<int32_t>(word + 1));
      const auto& phones = lang.lexicon[static_cast<size_t>(word)];
      phone_string.insert(phone_string.end(), phones.begin(), phones.end());
    }

    std::vector<float> frames;
    int64_t t_total = 0;
    for (int ph : phone_string) {
      const Phone& phone = lang.phones[static_cast<size_t>(ph)];
      int duration = phone.mean_duration;
      if (phone.duration_jitter > 0)
        duration += static_cast<int>(utt_rng.bounded(
                        static_cast<uint64_t>(2 * phone.duration_jitter + 1))) -
                    phone.duration_jitter;
      duration = std::max(duration, 1);
      for (int f = 0; f < duration; ++f) {
        for (int cdim = 0; cdim < lang.feature_dim; ++cdim)
          frames.push_back(phone.mean[static_cast<size_t>(cdim)] +
                           phone.stdev * utt_rng.normal());
        ++t_total;
      }
    }
    utt.features = Tensor::from({t_total, lang.feature_dim}, std::move(frames));
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

}  // namespace isib
