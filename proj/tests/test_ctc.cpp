// tests/test_ctc.cpp

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

#include <cmath>

#include "isib/ctc.hpp"
#include "isib/error.hpp"
#include "isib/grad_check.hpp"
#include "isib/rng.hpp"
#include "oracles.hpp"

using namespace isib;

namespace {

Tensor random_logits(int64_t t, int64_t c, Rng& rng, float scale = 2.0f) {
  Tensor out({t, c});
  for (float& v : out.values()) v = rng.uniform(-scale, scale);
  return out;
}

// Feasible random target for T frames over [1, v].
LabelSequence random_target(int64_t t, int32_t v, int64_t max_len, Rng& rng) {
  LabelSequence seq;
  seq.vocab = v;
  const int64_t len = static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(max_len + 1)));
  for (int64_t i = 0; i < len; ++i)
    seq.labels.push_back(static_cast<int32_t>(1 + rng.bounded(static_cast<uint64_t>(v))));
  while (ctc_min_frames(seq) > t) seq.labels.pop_back();
  return seq;
}

}  // namespace

TEST_SUITE("ctc") {

TEST_CASE("single uniform frame: nll is ln 3") {
  Tensor logits({1, 3});  // uniform over {blank, 1, 2}
  LabelSequence target{{1}, 2};
  CtcResult res = ctc_loss(logits, target);
  CHECK(res.nll == doctest::Approx(std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("two uniform frames, target [1]: three of nine paths survive") {
  Tensor logits({2, 3});
  LabelSequence target{{1}, 2};
  CtcResult res = ctc_loss(logits, target);
  CHECK(res.nll == doctest::Approx(-std::log(3.0 / 9.0)).epsilon(1e-9));
  CHECK(res.nll == doctest::Approx(test::ctc_enumerate_nll(logits, target.labels)).epsilon(1e-9));
}

TEST_CASE("random small instances match exhaustive path enumeration") {
  int checked = 0;
  for (uint64_t seed = 1; checked < 100; ++seed) {
    Rng rng(seed);
    const int64_t t = 1 + static_cast<int64_t>(rng.bounded(6));
    const int32_t v = 1 + static_cast<int32_t>(rng.bounded(3));
    Tensor logits = random_logits(t, v + 1, rng);
    LabelSequence target = random_target(t, v, 3, rng);
    CtcResult res = ctc_loss(logits, target);
    const double oracle = test::ctc_enumerate_nll(logits, target.labels);
    CHECK(std::abs(res.nll - oracle) <= 1e-6);
    CHECK(res.nll >= 0.0);
    ++checked;
  }
}

TEST_CASE("analytic gradient matches finite differences") {
  for (uint64_t seed = 31; seed <= 40; ++seed) {
    Rng rng(seed);
    const int64_t t = 3 + static_cast<int64_t>(rng.bounded(4));
    const int32_t v = 2 + static_cast<int32_t>(rng.bounded(2));
    Tensor logits = random_logits(t, v + 1, rng, 1.5f);
    LabelSequence target = random_target(t, v, 3, rng);

    CtcResult res = ctc_loss(logits, target);
    const double eps = 1e-3;
    for (int64_t i = 0; i < logits.numel(); ++i) {
      const float orig = logits.at(i);
      const float hi = orig + static_cast<float>(eps);
      const float lo = orig - static_cast<float>(eps);
      logits.at(i) = hi;
      const double f_hi = ctc_loss(logits, target).nll;
      logits.at(i) = lo;
      const double f_lo = ctc_loss(logits, target).nll;
      logits.at(i) = orig;
      const double fd = (f_hi - f_lo) / (static_cast<double>(hi) - static_cast<double>(lo));
      CHECK(relative_error(fd, res.grad_logits.at(i)) <= 1e-3);
    }
  }
}

TEST_CASE("nll decreases under plain gradient descent") {
  Rng rng(41);
  Tensor logits = random_logits(8, 4, rng);
  LabelSequence target{{2, 1, 3}, 3};
  double prev = ctc_loss(logits, target).nll;
  const double first = prev;
  for (int step = 0; step < 50; ++step) {
    CtcResult res = ctc_loss(logits, target);
    for (int64_t i = 0; i < logits.numel(); ++i)
      logits.at(i) -= 0.5f * res.grad_logits.at(i);
    const double now = ctc_loss(logits, target).nll;
    prev = now;
  }
  CHECK(prev < first);
}

TEST_CASE("infeasible targets raise the dedicated error") {
  Tensor logits({2, 3});
  CHECK_THROWS_AS(ctc_loss(logits, LabelSequence{{1, 2, 1}, 2}), InfeasibleTargetError);
  CHECK_THROWS_AS(ctc_loss(logits, LabelSequence{{1, 1}, 2}), InfeasibleTargetError);
  // Bad labels are a plain contract violation, not infeasibility.
  CHECK_THROWS_AS(ctc_loss(logits, LabelSequence{{0}, 2}), InvalidInputError);
  CHECK_THROWS_AS(ctc_loss(logits, LabelSequence{{3}, 2}), InvalidInputError);
}

TEST_CASE("empty target is the all-blank path") {
  Tensor logits({3, 3});
  LabelSequence empty{{}, 2};
  CtcResult res = ctc_loss(logits, empty);
  CHECK(res.nll == doctest::Approx(3.0 * std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("greedy decode collapses repeats and drops blanks") {
  // argmax sequence blank,blank -> empty
  Tensor blanks = Tensor::from({2, 3}, {5, 0, 0, 5, 0, 0});
  CHECK(greedy_decode(blanks).empty());

  // argmax sequence 1,1,blank,1 -> [1, 1]
  Tensor seq = Tensor::from({4, 2}, {0, 5, 0, 5, 5, 0, 0, 5});
  const std::vector<int32_t> expect{1, 1};
  CHECK(greedy_decode(seq) == expect);
}

TEST_CASE("greedy decode matches the reference collapse on random logits") {
  for (uint64_t seed = 51; seed <= 80; ++seed) {
    Rng rng(seed);
    Tensor logits = random_logits(1 + static_cast<int64_t>(rng.bounded(12)),
                                  2 + static_cast<int64_t>(rng.bounded(4)), rng);
    CHECK(greedy_decode(logits) == test::greedy_reference(logits));
  }
}

TEST_CASE("decode is invariant to per-frame constant shifts") {
  Rng rng(81);
  Tensor logits = random_logits(10, 4, rng);
  Tensor shifted = logits;
  for (int64_t t = 0; t < 10; ++t) {
    const float shift = rng.uniform(-30.0f, 30.0f);
    for (int64_t j = 0; j < 4; ++j) shifted.at(t, j) += shift;
  }
  CHECK(greedy_decode(logits) == greedy_decode(shifted));
}

}  // TEST_SUITE
