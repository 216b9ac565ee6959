// core/src/kmeans.cpp

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

#include "isib/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isib/error.hpp"
#include "isib/parallel.hpp"

namespace isib {

namespace {

double sq_dist(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

}  // namespace

int64_t assign_hard(std::span<const float> x, const Codebook& codebook) {
  if (static_cast<int64_t>(x.size()) != codebook.dim())
    throw InvalidInputError("assign_hard: point dimension does not match codebook");
  int64_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int64_t j = 0; j < codebook.k(); ++j) {
    const double d = sq_dist(x, codebook.centroids.row(j));
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

LloydResult lloyd_fit(const Tensor& points, int64_t k, Rng rng, int max_iter, double tol) {
  require_rank(points, 2, "lloyd_fit points");
  const int64_t n = points.dim(0), d = points.dim(1);
  if (k < 1) throw InvalidInputError("lloyd_fit: k must be >= 1");
  if (n < k)
    throw InvalidInputError("lloyd_fit: need at least k points, got " + std::to_string(n) +
                            " for k=" + std::to_string(k));
  if (!points.all_finite()) throw InvalidInputError("lloyd_fit: points must be finite");

  Codebook cb;
  cb.centroids = Tensor({k, d});

  // k-means++ seeding: first centroid uniform, the rest sampled with
  // probability proportional to the squared distance to the nearest chosen.
  std::vector<double> d2(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
  auto seed_centroid = [&](int64_t slot, int64_t point) {
    std::copy_n(points.row(point).data(), d, cb.centroids.row(slot).data());
  };
  seed_centroid(0, static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(n))));
  for (int64_t j = 1; j < k; ++j) {
    double total = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      const double dist = sq_dist(points.row(i), cb.centroids.row(j - 1));
      d2[static_cast<size_t>(i)] = std::min(d2[static_cast<size_t>(i)], dist);
      total += d2[static_cast<size_t>(i)];
    }
    int64_t pick = -1;
    if (total > 0.0) {
      const double r = rng.next_double() * total;
      double run = 0.0;
      for (int64_t i = 0; i < n; ++i) {
        run += d2[static_cast<size_t>(i)];
        if (run >= r) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    } else {
      // Fewer distinct points than requested clusters; fall back to a plain
      // index so fitting still terminates.
      pick = j % n;
    }
    seed_centroid(j, pick);
  }

  std::vector<int64_t> assign(static_cast<size_t>(n), 0);
  std::vector<double> dist(static_cast<size_t>(n), 0.0);
  LloydResult result;

  for (int iter = 0; iter < max_iter; ++iter) {
    // Assignment pass; pure per-point, so chunks may run concurrently.
    parallel_for(n, [&](int64_t i) {
      int64_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int64_t j = 0; j < k; ++j) {
        const double dd = sq_dist(points.row(i), cb.centroids.row(j));
        if (dd < best_d) {
          best_d = dd;
          best = j;
        }
      }
      assign[static_cast<size_t>(i)] = best;
      dist[static_cast<size_t>(i)] = best_d;
    }, /*grain=*/256);

    double inertia = 0.0;
    for (int64_t i = 0; i < n; ++i) inertia += dist[static_cast<size_t>(i)];
    const bool converged =
        !result.inertia_history.empty() && result.inertia_history.back() - inertia < tol;
    result.inertia_history.push_back(inertia);
    if (converged || iter == max_iter - 1) break;

    // Update pass: means in double, then empty-cluster repair.
    std::vector<double> sums(static_cast<size_t>(k * d), 0.0);
    std::vector<int64_t> counts(static_cast<size_t>(k), 0);
    for (int64_t i = 0; i < n; ++i) {
      const int64_t j = assign[static_cast<size_t>(i)];
      counts[static_cast<size_t>(j)]++;
      const float* p = points.row(i).data();
      double* s = sums.data() + j * d;
      for (int64_t c = 0; c < d; ++c) s[c] += p[c];
    }
    std::vector<bool> taken(static_cast<size_t>(n), false);
    for (int64_t j = 0; j < k; ++j) {
      if (counts[static_cast<size_t>(j)] > 0) {
        float* c = cb.centroids.row(j).data();
        const double* s = sums.data() + j * d;
        for (int64_t cdim = 0; cdim < d; ++cdim)
          c[cdim] = static_cast<float>(s[cdim] / static_cast<double>(counts[static_cast<size_t>(j)]));
      } else {
        // Re-seed to the point farthest from its assigned centroid.
        int64_t far_i = -1;
        double far_d = -1.0;
        for (int64_t i = 0; i < n; ++i) {
          if (taken[static_cast<size_t>(i)]) continue;
          if (dist[static_cast<size_t>(i)] > far_d) {
            far_d = dist[static_cast<size_t>(i)];
            far_i = i;
          }
        }
        if (far_i >= 0) {
          taken[static_cast<size_t>(far_i)] = true;
          seed_centroid(j, far_i);
        }
      }
    }
  }

  result.codebook = std::move(cb);
  return result;
}

}  // namespace isib
