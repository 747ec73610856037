// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <string>

#include "ctqw/parameters.hpp"
#include "ctqw/rng.hpp"
#include "ctqw/tensor.hpp"

namespace ctqw {

/// Affine map y = x W + b with W stored input-major as [in, out]. Accepts a
/// row batch [n, in] or a single vector [in].
struct Linear {
  Tensor weight;
  Tensor bias;  // undefined for bias-free layers

  Tensor operator()(const Tensor& x) const;
  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
  void register_into(ParameterSet& params, const std::string& prefix) const;
};

// Glorot-uniform weight, zero bias.
Linear make_linear(std::size_t in, std::size_t out, bool with_bias, Rng& rng);
Tensor glorot_uniform(std::size_t in, std::size_t out, Rng& rng);
Tensor uniform_tensor(Shape shape, double bound, Rng& rng);

/// Per-call switches shared by every layer of one forward pass.
struct ForwardContext {
  bool train = false;
  double dropout = 0.0;
  Rng* rng = nullptr;  // required when train && dropout > 0
};

Tensor apply_dropout(const Tensor& x, const ForwardContext& ctx);

}  // namespace ctqw
