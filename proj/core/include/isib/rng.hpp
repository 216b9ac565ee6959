// core/include/isib/rng.hpp

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

#ifndef ISIB_RNG_HPP_
#define ISIB_RNG_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace isib {

// Deterministic generator used everywhere in the repo. The raw 64-bit stream
// is fixed for a given seed on every platform.
//
// Construction: the four 256-bit state words are the first four outputs of a
// splitmix64 chain started at the seed.
//   splitmix64 step:  z  = (x += 0x9E3779B97F4A7C15)
//                     z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
//                     z ^= z >> 27; z *= 0x94D049BB133111EB
//                     z ^= z >> 31
// Output: xoshiro256**
//   result = rotl(s1 * 5, 7) * 9
//   t = s1 << 17; s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t
//   s3 = rotl(s3, 45)
class Rng {
 public:
  Rng() : Rng(0) {}

  explicit Rng(uint64_t seed) : seed_(seed) {
    uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(&x);
  }

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  float uniform(float lo, float hi) {
    return lo + static_cast<float>(next_double()) * (hi - lo);
  }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  uint64_t bounded(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t min = (0 - n) % n;
    uint64_t x;
    do {
      x = next_u64();
    } while (x < min);
    return x % n;
  }

  // Standard normal via the polar method; the spare value is cached.
  float normal() {
    if (have_spare_) {
      have_spare_ = false;
      return static_cast<float>(spare_);
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return static_cast<float>(u * m);
  }

  // Independent stream derived from this generator's seed and a salt.
  // Depends only on (seed, salt), never on how much of this stream was used.
  Rng child(uint64_t salt) const {
    uint64_t x = seed_;
    uint64_t h = splitmix64(&x);
    h ^= salt + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    uint64_t y = h;
    return Rng(splitmix64(&y));
  }

  Rng child(std::string_view name) const { return child(fnv1a64(name)); }

  static uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
    return h;
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t* x) {
    uint64_t z = (*x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t seed_;
  std::array<uint64_t, 4> state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace isib

#endif  // ISIB_RNG_HPP_
