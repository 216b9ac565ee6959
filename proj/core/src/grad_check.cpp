// core/src/grad_check.cpp

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

#include "isib/grad_check.hpp"

#include <cmath>

#include "isib/error.hpp"

namespace isib {

namespace {

void require_bounded(const std::vector<Tensor>& tensors, const char* what) {
  for (const Tensor& t : tensors)
    for (float v : t.values())
      if (!std::isfinite(v) || v < -3.0f || v > 3.0f)
        throw InvalidInputError(std::string(what) + ": probe values must lie in [-3, 3]");
}

// sum_j p_j * (a_j - b_j), accumulated in double. The per-element difference
// is taken first so that unperturbed outputs cancel exactly.
double projected_delta(const std::vector<Tensor>& proj, const std::vector<Tensor>& a,
                       const std::vector<Tensor>& b) {
  double acc = 0.0;
  for (size_t k = 0; k < proj.size(); ++k) {
    auto pv = proj[k].values();
    auto av = a[k].values();
    auto bv = b[k].values();
    for (size_t i = 0; i < pv.size(); ++i)
      acc += static_cast<double>(pv[i]) *
             (static_cast<double>(av[i]) - static_cast<double>(bv[i]));
  }
  return acc;
}

}  // namespace

double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
  return std::sqrt(diff) / denom;
}

double check_gradients(const LayerContract& layer, const GradProbe& probe, double eps, Rng& rng) {
  if (!(eps >= 1e-4 && eps <= 1e-2))
    throw InvalidInputError("check_gradients: eps must lie in [1e-4, 1e-2]");
  require_bounded(probe.inputs, "check_gradients inputs");
  require_bounded(probe.params, "check_gradients params");

  std::vector<Tensor> inputs = probe.inputs;
  std::vector<Tensor> params = probe.params;

  LayerContext ctx;
  std::vector<Tensor> outputs = layer.forward(inputs, params, &ctx);
  for (const Tensor& t : outputs)
    if (!t.all_finite())
      throw NumericError(std::string("check_gradients: non-finite forward output of ") +
                         std::string(layer.name()));

  int64_t total_out = 0;
  for (const Tensor& t : outputs) total_out += t.numel();
  const float scale = 1.0f / std::sqrt(static_cast<float>(std::max<int64_t>(total_out, 1)));
  std::vector<Tensor> proj;
  proj.reserve(outputs.size());
  for (const Tensor& t : outputs) {
    Tensor p(t.shape());
    for (float& v : p.values()) v = rng.uniform(-1.0f, 1.0f) * scale;
    proj.push_back(std::move(p));
  }

  std::vector<Tensor> grad_inputs, grad_params;
  layer.backward(ctx, proj, &grad_inputs, &grad_params);

  double max_err = 0.0;
  auto sweep = [&](std::vector<Tensor>& group, const std::vector<Tensor>& analytic) {
    for (size_t t = 0; t < group.size(); ++t) {
      auto vals = group[t].values();
      std::vector<double> fd(vals.size(), 0.0), an(vals.size(), 0.0);
      for (size_t i = 0; i < vals.size(); ++i) {
        const float orig = vals[i];
        const float hi = orig + static_cast<float>(eps);
        const float lo = orig - static_cast<float>(eps);
        const double h = static_cast<double>(hi) - static_cast<double>(lo);

        vals[i] = hi;
        std::vector<Tensor> out_hi = layer.forward(inputs, params, nullptr);
        vals[i] = lo;
        std::vector<Tensor> out_lo = layer.forward(inputs, params, nullptr);
        vals[i] = orig;

        fd[i] = projected_delta(proj, out_hi, out_lo) / h;
        an[i] = analytic[t].at(static_cast<int64_t>(i));
      }
      max_err = std::max(max_err, relative_error(fd, an));
    }
  };
  sweep(inputs, grad_inputs);
  sweep(params, grad_params);
  return max_err;
}

}  // namespace isib
