// core/include/isib/diffkm.hpp

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

#ifndef ISIB_DIFFKM_HPP_
#define ISIB_DIFFKM_HPP_

#include <cstdint>
#include <vector>

#include "isib/kmeans.hpp"
#include "isib/layers.hpp"

namespace isib {

// Per-frame soft cluster responsibilities: softmax over the negative squared
// distances divided by the temperature.
struct SoftAssignment {
  Tensor weights;  // T x K, rows sum to 1
  float temperature = 1.0f;
};

// What the quantizer emits on the forward pass.
//   kStraightThrough: the hard centroid of the winning cluster, while
//     backward still follows the soft mixture (training mode).
//   kSoftPath: the soft mixture itself; fully differentiable, used by the
//     finite-difference checks.
enum class DiffKmMode { kStraightThrough, kSoftPath };

struct DiffKmOutput {
  std::vector<int32_t> tokens;  // argmin distance per frame, == assign_hard
  Tensor embeddings;            // T x D
  SoftAssignment soft;
};

// Quantizes T frames against the codebook. tau must be positive.
DiffKmOutput diffkm_forward(const Tensor& frames, const Codebook& codebook, float tau,
                            DiffKmMode mode = DiffKmMode::kStraightThrough,
                            LayerContext* ctx = nullptr);

// Gradients of the soft-path mixture with respect to the frames and the
// centroids. Shared by both modes; straight-through means the hard forward
// routes exactly these gradients.
void diffkm_backward(const LayerContext& ctx, const Tensor& grad_embeddings, Tensor* grad_frames,
                     Tensor* grad_centroids);

// LayerContract adapters. inputs: {frames T x D}; params: {centroids K x D};
// the temperature rides in the layer.
class DiffKmLayer final : public LayerContract {
 public:
  explicit DiffKmLayer(float tau, DiffKmMode mode = DiffKmMode::kStraightThrough)
      : tau_(tau), mode_(mode) {}
  std::string_view name() const override {
    return mode_ == DiffKmMode::kStraightThrough ? "diffkm" : "diffkm_soft";
  }
  std::vector<Tensor> forward(std::span<const Tensor> inputs, std::span<const Tensor> params,
                              LayerContext* ctx) const override;
  void backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                std::vector<Tensor>* grad_inputs,
                std::vector<Tensor>* grad_params) const override;

 private:
  float tau_;
  DiffKmMode mode_;
};

}  // namespace isib

#endif  // ISIB_DIFFKM_HPP_
