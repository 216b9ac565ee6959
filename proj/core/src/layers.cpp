// core/src/layers.cpp

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

#include "isib/layers.hpp"

#include <cmath>

#include "isib/error.hpp"

namespace isib {

namespace {

void require_arity(std::span<const Tensor> inputs, size_t ni, std::span<const Tensor> params,
                   size_t np, const char* what) {
  if (inputs.size() != ni || params.size() != np)
    throw InvalidInputError(std::string(what) + ": wrong number of inputs or params");
}

}  // namespace

// ---------------------------------------------------------------------------
// AffineLayer

std::vector<Tensor> AffineLayer::forward(std::span<const Tensor> inputs,
                                         std::span<const Tensor> params,
                                         LayerContext* ctx) const {
  require_arity(inputs, 1, params, 2, "affine");
  const Tensor& x = inputs[0];
  const Tensor& w = params[0];
  const Tensor& b = params[1];
  require_rank(x, 2, "affine input");
  require_rank(w, 2, "affine weight");
  require_rank(b, 1, "affine bias");
  if (x.dim(1) != w.dim(0) || w.dim(1) != b.dim(0))
    throw InvalidInputError("affine: shapes do not conform: x " + x.shape_str() + ", w " +
                            w.shape_str() + ", b " + b.shape_str());

  const int64_t n = x.dim(0), din = x.dim(1), dout = w.dim(1);
  Tensor y({n, dout});
  std::vector<double> acc(static_cast<size_t>(dout));
  for (int64_t r = 0; r < n; ++r) {
    const float* xr = x.row(r).data();
    for (int64_t j = 0; j < dout; ++j) acc[static_cast<size_t>(j)] = b.at(j);
    for (int64_t i = 0; i < din; ++i) {
      const double xi = xr[i];
      const float* wr = w.row(i).data();
      for (int64_t j = 0; j < dout; ++j) acc[static_cast<size_t>(j)] += xi * wr[j];
    }
    float* yr = y.row(r).data();
    for (int64_t j = 0; j < dout; ++j) yr[j] = static_cast<float>(acc[static_cast<size_t>(j)]);
  }
  if (ctx) ctx->saved = {x, w};
  return {std::move(y)};
}

void AffineLayer::backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                           std::vector<Tensor>* grad_inputs,
                           std::vector<Tensor>* grad_params) const {
  const Tensor& x = ctx.saved[0];
  const Tensor& w = ctx.saved[1];
  const Tensor& g = grad_outputs[0];
  const int64_t n = x.dim(0), din = x.dim(1), dout = w.dim(1);
  require_shape(g, {n, dout}, "affine grad_output");

  Tensor gx({n, din});
  for (int64_t r = 0; r < n; ++r) {
    const float* gr = g.row(r).data();
    float* gxr = gx.row(r).data();
    for (int64_t i = 0; i < din; ++i) {
      double acc = 0.0;
      for (int64_t j = 0; j < dout; ++j) acc += static_cast<double>(gr[j]) * w.at(i, j);
      gxr[i] = static_cast<float>(acc);
    }
  }

  Tensor gw({din, dout});
  Tensor gb({dout});
  std::vector<double> acc(static_cast<size_t>((din + 1) * dout), 0.0);
  for (int64_t r = 0; r < n; ++r) {
    const float* xr = x.row(r).data();
    const float* gr = g.row(r).data();
    for (int64_t i = 0; i < din; ++i) {
      const double xi = xr[i];
      double* row = acc.data() + i * dout;
      for (int64_t j = 0; j < dout; ++j) row[j] += xi * gr[j];
    }
    double* brow = acc.data() + din * dout;
    for (int64_t j = 0; j < dout; ++j) brow[j] += gr[j];
  }
  for (int64_t i = 0; i < din * dout; ++i) gw.at(i) = static_cast<float>(acc[static_cast<size_t>(i)]);
  for (int64_t j = 0; j < dout; ++j)
    gb.at(j) = static_cast<float>(acc[static_cast<size_t>(din * dout + j)]);

  if (grad_inputs) *grad_inputs = {std::move(gx)};
  if (grad_params) *grad_params = {std::move(gw), std::move(gb)};
}

// ---------------------------------------------------------------------------
// ReluLayer

std::vector<Tensor> ReluLayer::forward(std::span<const Tensor> inputs,
                                       std::span<const Tensor> params, LayerContext* ctx) const {
  require_arity(inputs, 1, params, 0, "relu");
  const Tensor& x = inputs[0];
  Tensor y = x;
  for (float& v : y.values())
    if (v <= 0.0f) v = 0.0f;
  if (ctx) ctx->saved = {x};
  return {std::move(y)};
}

void ReluLayer::backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                         std::vector<Tensor>* grad_inputs,
                         std::vector<Tensor>* grad_params) const {
  const Tensor& x = ctx.saved[0];
  const Tensor& g = grad_outputs[0];
  Tensor gx = g;
  auto xv = x.values();
  auto gv = gx.values();
  for (int64_t i = 0; i < x.numel(); ++i)
    if (xv[static_cast<size_t>(i)] <= 0.0f) gv[static_cast<size_t>(i)] = 0.0f;
  if (grad_inputs) *grad_inputs = {std::move(gx)};
  if (grad_params) grad_params->clear();
}

// ---------------------------------------------------------------------------
// LogSoftmaxLayer

std::vector<Tensor> LogSoftmaxLayer::forward(std::span<const Tensor> inputs,
                                             std::span<const Tensor> params,
                                             LayerContext* ctx) const {
  require_arity(inputs, 1, params, 0, "log_softmax");
  const Tensor& x = inputs[0];
  require_rank(x, 2, "log_softmax input");
  const int64_t n = x.dim(0), c = x.dim(1);

  Tensor y({n, c});
  for (int64_t r = 0; r < n; ++r) {
    const float* xr = x.row(r).data();
    float* yr = y.row(r).data();
    double m = xr[0];
    for (int64_t j = 1; j < c; ++j) m = std::max(m, static_cast<double>(xr[j]));
    double z = 0.0;
    for (int64_t j = 0; j < c; ++j) z += std::exp(static_cast<double>(xr[j]) - m);
    const double logz = std::log(z);
    for (int64_t j = 0; j < c; ++j)
      yr[j] = static_cast<float>(static_cast<double>(xr[j]) - m - logz);
  }
  if (ctx) ctx->saved = {y};
  return {std::move(y)};
}

void LogSoftmaxLayer::backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                               std::vector<Tensor>* grad_inputs,
                               std::vector<Tensor>* grad_params) const {
  const Tensor& y = ctx.saved[0];
  const Tensor& g = grad_outputs[0];
  const int64_t n = y.dim(0), c = y.dim(1);
  Tensor gx({n, c});
  for (int64_t r = 0; r < n; ++r) {
    const float* yr = y.row(r).data();
    const float* gr = g.row(r).data();
    float* gxr = gx.row(r).data();
    double gsum = 0.0;
    for (int64_t j = 0; j < c; ++j) gsum += gr[j];
    for (int64_t j = 0; j < c; ++j)
      gxr[j] = static_cast<float>(static_cast<double>(gr[j]) -
                                  std::exp(static_cast<double>(yr[j])) * gsum);
  }
  if (grad_inputs) *grad_inputs = {std::move(gx)};
  if (grad_params) grad_params->clear();
}

// ---------------------------------------------------------------------------
// IdentityLayer

std::vector<Tensor> IdentityLayer::forward(std::span<const Tensor> inputs,
                                           std::span<const Tensor> params,
                                           LayerContext* ctx) const {
  require_arity(inputs, 1, params, 0, "identity");
  (void)ctx;
  return {inputs[0]};
}

void IdentityLayer::backward(const LayerContext& ctx, std::span<const Tensor> grad_outputs,
                             std::vector<Tensor>* grad_inputs,
                             std::vector<Tensor>* grad_params) const {
  (void)ctx;
  if (grad_inputs) *grad_inputs = {grad_outputs[0]};
  if (grad_params) grad_params->clear();
}

// ---------------------------------------------------------------------------
// Free-function forms

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  static const AffineLayer layer;
  const Tensor inputs[] = {x};
  const Tensor params[] = {w, b};
  return layer.forward(inputs, params, nullptr)[0];
}

Tensor relu(const Tensor& x) {
  static const ReluLayer layer;
  const Tensor inputs[] = {x};
  return layer.forward(inputs, {}, nullptr)[0];
}

Tensor log_softmax(const Tensor& x) {
  static const LogSoftmaxLayer layer;
  const Tensor inputs[] = {x};
  return layer.forward(inputs, {}, nullptr)[0];
}

}  // namespace isib
