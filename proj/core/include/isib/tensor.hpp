// core/include/isib/tensor.hpp

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

#ifndef ISIB_TENSOR_HPP_
#define ISIB_TENSOR_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace isib {

// Dense row-major array of 32-bit floats. The one numeric carrier of the
// repo; everything that trains or serializes is made of these.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int64_t> shape, float value);
  static Tensor from(std::vector<int64_t> shape, std::vector<float> data);

  const std::vector<int64_t>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  float& at(int64_t i) { return data_[static_cast<size_t>(i)]; }
  float at(int64_t i) const { return data_[static_cast<size_t>(i)]; }
  float& at(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * shape_[1] + c)]; }
  float at(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * shape_[1] + c)]; }

  // Row view of a rank-2 tensor.
  std::span<const float> row(int64_t r) const {
    return {data_.data() + r * shape_[1], static_cast<size_t>(shape_[1])};
  }
  std::span<float> row(int64_t r) {
    return {data_.data() + r * shape_[1], static_cast<size_t>(shape_[1])};
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  void fill(float value);

  std::string shape_str() const;

 private:
  std::vector<int64_t> shape_;
  std::vector<float> data_;
};

// Throws InvalidInputError with a shape dump when the check fails.
void require_rank(const Tensor& t, int rank, const char* what);
void require_shape(const Tensor& t, const std::vector<int64_t>& shape, const char* what);

}  // namespace isib

#endif  // ISIB_TENSOR_HPP_
