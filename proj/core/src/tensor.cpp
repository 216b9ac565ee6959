// core/src/tensor.cpp

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

#include "isib/tensor.hpp"

#include <cmath>

#include "isib/error.hpp"

namespace isib {

namespace {

int64_t checked_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) throw InvalidInputError("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<size_t>(checked_numel(shape_)), 0.0f);
}

Tensor Tensor::full(std::vector<int64_t> shape, float value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::from(std::vector<int64_t> shape, std::vector<float> data) {
  if (checked_numel(shape) != static_cast<int64_t>(data.size()))
    throw InvalidInputError("tensor data length does not match shape");
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(data);
  return t;
}

bool Tensor::all_finite() const {
  for (float v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::fill(float value) {
  for (float& v : data_) v = value;
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

void require_rank(const Tensor& t, int rank, const char* what) {
  if (t.rank() != rank)
    throw InvalidInputError(std::string(what) + ": expected rank " + std::to_string(rank) +
                            ", got shape " + t.shape_str());
}

void require_shape(const Tensor& t, const std::vector<int64_t>& shape, const char* what) {
  if (t.shape() != shape) {
    Tensor probe;
    std::string want = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) want += "x";
      want += std::to_string(shape[i]);
    }
    want += "]";
    throw InvalidInputError(std::string(what) + ": expected shape " + want + ", got " +
                            t.shape_str());
  }
}

}  // namespace isib
