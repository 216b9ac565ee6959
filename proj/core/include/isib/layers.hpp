// core/include/isib/layers.hpp

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

#ifndef ISIB_LAYERS_HPP_
#define ISIB_LAYERS_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "isib/tensor.hpp"

namespace isib {

// Everything a matching backward call needs, captured by forward.
struct LayerContext {
  std::vector<Tensor> saved;
  std::vector<float> scalars;
  std::vector<int64_t> ints;
};

// The differentiation contract of the repo: a fixed forward map plus a
// vector-Jacobian backward. Layers are stateless; parameters travel with the
// call. Backward consumes exactly the context its own forward saved and
// returns gradients shaped like the inputs and parameters.
class LayerContract {
 public:
  virtual ~LayerContract() = default;

  virtual std::string_view name() const = 0;

  virtual std::vector<Tensor> forward(std::span<const Tensor> inputs,
                                      std::span<const Tensor> params,
                                      LayerContext* ctx) const = 0;

  virtual void backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                        std::vector<Tensor>* grad_inputs,
                        std::vector<Tensor>* grad_params) const = 0;
};

// out[n,j] = sum_i in[n,i] * w[i,j] + b[j].
// inputs: {x: N x Din}; params: {w: Din x Dout, b: Dout}.
class AffineLayer final : public LayerContract {
 public:
  std::string_view name() const override { return "affine"; }
  std::vector<Tensor> forward(std::span<const Tensor> inputs, std::span<const Tensor> params,
                              LayerContext* ctx) const override;
  void backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                std::vector<Tensor>* grad_inputs,
                std::vector<Tensor>* grad_params) const override;
};

// Elementwise max(0, x); the subgradient at 0 is 0.
class ReluLayer final : public LayerContract {
 public:
  std::string_view name() const override { return "relu"; }
  std::vector<Tensor> forward(std::span<const Tensor> inputs, std::span<const Tensor> params,
                              LayerContext* ctx) const override;
  void backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                std::vector<Tensor>* grad_inputs,
                std::vector<Tensor>* grad_params) const override;
};

// Row-wise log softmax with max subtraction. inputs: {x: N x C}.
class LogSoftmaxLayer final : public LayerContract {
 public:
  std::string_view name() const override { return "log_softmax"; }
  std::vector<Tensor> forward(std::span<const Tensor> inputs, std::span<const Tensor> params,
                              LayerContext* ctx) const override;
  void backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                std::vector<Tensor>* grad_inputs,
                std::vector<Tensor>* grad_params) const override;
};

// Pass-through; exists so the gradient checker has an exact fixture.
class IdentityLayer final : public LayerContract {
 public:
  std::string_view name() const override { return "identity"; }
  std::vector<Tensor> forward(std::span<const Tensor> inputs, std::span<const Tensor> params,
                              LayerContext* ctx) const override;
  void backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                std::vector<Tensor>* grad_inputs,
                std::vector<Tensor>* grad_params) const override;
};

// Convenience single-tensor entry points used by model code.
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor log_softmax(const Tensor& x);

}  // namespace isib

#endif  // ISIB_LAYERS_HPP_
