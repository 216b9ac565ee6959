// core/src/diffkm.cpp

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

#include "isib/diffkm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "isib/error.hpp"

namespace isib {

DiffKmOutput diffkm_forward(const Tensor& frames, const Codebook& codebook, float tau,
                            DiffKmMode mode, LayerContext* ctx) {
  if (!(tau > 0.0f)) throw InvalidInputError("diffkm: tau must be positive");
  require_rank(frames, 2, "diffkm frames");
  const int64_t t_len = frames.dim(0), d = frames.dim(1), k = codebook.k();
  if (d != codebook.dim())
    throw InvalidInputError("diffkm: frame dim " + std::to_string(d) +
                            " does not match codebook dim " + std::to_string(codebook.dim()));

  DiffKmOutput out;
  out.tokens.resize(static_cast<size_t>(t_len));
  out.embeddings = Tensor({t_len, d});
  out.soft.weights = Tensor({t_len, k});
  out.soft.temperature = tau;

  std::vector<double> z(static_cast<size_t>(k));
  for (int64_t t = 0; t < t_len; ++t) {
    const float* h = frames.row(t).data();
    int64_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < k; ++j) {
      const float* m = codebook.centroids.row(j).data();
      double dist = 0.0;
      for (int64_t c = 0; c < d; ++c) {
        const double diff = static_cast<double>(h[c]) - static_cast<double>(m[c]);
        dist += diff * diff;
      }
      z[static_cast<size_t>(j)] = -dist / static_cast<double>(tau);
      if (dist < best_d) {
        best_d = dist;
        best = j;
      }
    }
    out.tokens[static_cast<size_t>(t)] = static_cast<int32_t>(best);

    double zmax = z[0];
    for (int64_t j = 1; j < k; ++j) zmax = std::max(zmax, z[static_cast<size_t>(j)]);
    double norm = 0.0;
    for (int64_t j = 0; j < k; ++j) norm += std::exp(z[static_cast<size_t>(j)] - zmax);
    float* soft_row = out.soft.weights.row(t).data();
    for (int64_t j = 0; j < k; ++j)
      soft_row[j] = static_cast<float>(std::exp(z[static_cast<size_t>(j)] - zmax) / norm);

    float* e = out.embeddings.row(t).data();
    if (mode == DiffKmMode::kStraightThrough) {
      // Hard value: the winning centroid row, copied bit for bit.
      std::memcpy(e, codebook.centroids.row(best).data(), sizeof(float) * static_cast<size_t>(d));
    } else {
      for (int64_t c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int64_t j = 0; j < k; ++j)
          acc += static_cast<double>(soft_row[j]) * codebook.centroids.at(j, c);
        e[c] = static_cast<float>(acc);
      }
    }
  }

  if (ctx) {
    ctx->saved = {frames, codebook.centroids, out.soft.weights};
    ctx->scalars = {tau};
  }
  return out;
}

void diffkm_backward(const LayerContext& ctx, const Tensor& grad_embeddings, Tensor* grad_frames,
                     Tensor* grad_centroids) {
  const Tensor& frames = ctx.saved[0];
  const Tensor& centroids = ctx.saved[1];
  const Tensor& soft = ctx.saved[2];
  const double tau = ctx.scalars[0];
  const int64_t t_len = frames.dim(0), d = frames.dim(1), k = centroids.dim(0);
  require_shape(grad_embeddings, {t_len, d}, "diffkm grad_embeddings");

  Tensor gh({t_len, d});
  std::vector<double> gm(static_cast<size_t>(k * d), 0.0);

  std::vector<double> a(static_cast<size_t>(k));
  std::vector<double> r(static_cast<size_t>(k));
  for (int64_t t = 0; t < t_len; ++t) {
    const float* g = grad_embeddings.row(t).data();
    const float* h = frames.row(t).data();
    const float* s = soft.row(t).data();

    // a_j = g . m_j ; r_j = s_j (a_j - sum_k s_k a_k) is the gradient that
    // reaches the softmax logits z_j = -|h - m_j|^2 / tau.
    double mix = 0.0;
    for (int64_t j = 0; j < k; ++j) {
      const float* m = centroids.row(j).data();
      double dot = 0.0;
      for (int64_t c = 0; c < d; ++c) dot += static_cast<double>(g[c]) * m[c];
      a[static_cast<size_t>(j)] = dot;
      mix += static_cast<double>(s[j]) * dot;
    }
    for (int64_t j = 0; j < k; ++j)
      r[static_cast<size_t>(j)] = static_cast<double>(s[j]) * (a[static_cast<size_t>(j)] - mix);

    float* ghr = gh.row(t).data();
    for (int64_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (int64_t j = 0; j < k; ++j) {
        const double diff = static_cast<double>(centroids.at(j, c)) - static_cast<double>(h[c]);
        acc += r[static_cast<size_t>(j)] * 2.0 * diff / tau;
      }
      ghr[c] = static_cast<float>(acc);
    }
    for (int64_t j = 0; j < k; ++j) {
      double* gmj = gm.data() + j * d;
      for (int64_t c = 0; c < d; ++c) {
        const double diff = static_cast<double>(h[c]) - static_cast<double>(centroids.at(j, c));
        gmj[c] += static_cast<double>(s[j]) * g[c] + r[static_cast<size_t>(j)] * 2.0 * diff / tau;
      }
    }
  }

  if (grad_frames) *grad_frames = std::move(gh);
  if (grad_centroids) {
    Tensor out({k, d});
    for (int64_t i = 0; i < k * d; ++i) out.at(i) = static_cast<float>(gm[static_cast<size_t>(i)]);
    *grad_centroids = std::move(out);
  }
}

std::vector<Tensor> DiffKmLayer::forward(std::span<const Tensor> inputs,
                                         std::span<const Tensor> params,
                                         LayerContext* ctx) const {
  if (inputs.size() != 1 || params.size() != 1)
    throw InvalidInputError("diffkm: expects one input tensor and one parameter tensor");
  Codebook cb;
  cb.centroids = params[0];
  DiffKmOutput out = diffkm_forward(inputs[0], cb, tau_, mode_, ctx);
  return {std::move(out.embeddings)};
}

void DiffKmLayer::backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                           std::vector<Tensor>* grad_inputs,
                           std::vector<Tensor>* grad_params) const {
  Tensor gh, gm;
  diffkm_backward(ctx, grad_outputs[0], &gh, &gm);
  if (grad_inputs) *grad_inputs = {std::move(gh)};
  if (grad_params) *grad_params = {std::move(gm)};
}

}  // namespace isib
