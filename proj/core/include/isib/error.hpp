// core/include/isib/error.hpp

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

#ifndef ISIB_ERROR_HPP_
#define ISIB_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace isib {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Violated call contract: bad shapes, out-of-range arguments, unknown tags.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Operation attempted in the wrong lifecycle state (uninitialized codebook,
// stage mismatch, checkpoint/config mismatch).
class StateError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required. Carries the training
// step index when raised inside a training loop.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, int64_t step = -1)
      : Error(what), step_(step) {}
  int64_t step() const { return step_; }

 private:
  int64_t step_;
};

// CTC target cannot be aligned within the given number of frames. Kept
// distinct from NumericError so callers can tell a bad pair from a bad run.
class InfeasibleTargetError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

// Rejection sampling in the language generator ran out of retries.
class GenerationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace isib

#endif  // ISIB_ERROR_HPP_
