// core/include/isib/grad_check.hpp

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

#ifndef ISIB_GRAD_CHECK_HPP_
#define ISIB_GRAD_CHECK_HPP_

#include <vector>

#include "isib/layers.hpp"
#include "isib/rng.hpp"

namespace isib {

struct GradProbe {
  std::vector<Tensor> inputs;
  std::vector<Tensor> params;
};

// Relative error metric used by every gradient comparison in the repo:
// |a - b| / max(|a|, |b|, 1e-8), applied to scalars or, via the vector
// overload, to whole gradient tensors with |.| the Euclidean norm. The vector
// form is what float32 storage supports: a single element of a float32
// forward output carries ~1e-7 relative quantization, which a finite
// difference divides by 2*eps, so elementwise comparisons would drown small
// gradient entries in rounding noise while the norm stays well resolved.
inline double relative_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

double relative_error(std::span<const double> a, std::span<const double> b);

// Compares the layer's backward against central finite differences of a
// random scalar projection of its forward output, one gradient tensor at a
// time. Returns the worst per-tensor relative error over all inputs and
// parameters.
//
// eps must lie in [1e-4, 1e-2] and probe values in [-3, 3]. A non-finite
// forward output raises NumericError.
double check_gradients(const LayerContract& layer, const GradProbe& probe, double eps, Rng& rng);

}  // namespace isib

#endif  // ISIB_GRAD_CHECK_HPP_
