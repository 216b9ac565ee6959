// core/include/isib/kmeans.hpp

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

#ifndef ISIB_KMEANS_HPP_
#define ISIB_KMEANS_HPP_

#include <span>
#include <vector>

#include "isib/rng.hpp"
#include "isib/tensor.hpp"

namespace isib {

// K x D centroid stack shared by both recognizer branches.
struct Codebook {
  Tensor centroids;  // K x D

  int64_t k() const { return centroids.empty() ? 0 : centroids.dim(0); }
  int64_t dim() const { return centroids.empty() ? 0 : centroids.dim(1); }
};

struct LloydResult {
  Codebook codebook;
  // Total squared distance to assigned centroids after each assignment pass;
  // non-increasing by construction.
  std::vector<double> inertia_history;
};

// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded to
// the point currently farthest from its assigned centroid. Stops when the
// inertia improvement drops below tol or after max_iter passes.
LloydResult lloyd_fit(const Tensor& points, int64_t k, Rng rng, int max_iter = 50,
                      double tol = 1e-4);

// Index of the nearest centroid by squared Euclidean distance; ties break to
// the lowest index.
int64_t assign_hard(std::span<const float> x, const Codebook& codebook);

}  // namespace isib

#endif  // ISIB_KMEANS_HPP_
