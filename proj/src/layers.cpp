// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/layers.hpp"

#include <cmath>

#include "ctqw/errors.hpp"
#include "ctqw/ops.hpp"

namespace ctqw {

Tensor Linear::operator()(const Tensor& x) const {
  if (x.rank() == 1) {
    return reshape((*this)(reshape(x, {1, x.size()})), {out_features()});
  }
  Tensor y = matmul(x, weight);
  return bias.defined() ? y + bias : y;
}

void Linear::register_into(ParameterSet& params, const std::string& prefix) const {
  params.add(prefix + ".weight", weight);
  if (bias.defined()) params.add(prefix + ".bias", bias);
}

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  std::vector<double> v(numel(shape));
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::parameter(std::move(shape), std::move(v));
}

Tensor glorot_uniform(std::size_t in, std::size_t out, Rng& rng) {
  return uniform_tensor({in, out}, std::sqrt(6.0 / static_cast<double>(in + out)), rng);
}

Linear make_linear(std::size_t in, std::size_t out, bool with_bias, Rng& rng) {
  Linear layer;
  layer.weight = glorot_uniform(in, out, rng);
  if (with_bias) layer.bias = Tensor::parameter({out}, std::vector<double>(out, 0.0));
  return layer;
}

Tensor apply_dropout(const Tensor& x, const ForwardContext& ctx) {
  if (!ctx.train || ctx.dropout == 0.0) return x;
  if (ctx.rng == nullptr) throw ContractViolation("training-mode dropout needs an rng");
  return dropout(x, ctx.dropout, true, *ctx.rng);
}

}  // namespace ctqw
