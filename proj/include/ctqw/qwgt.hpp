// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <vector>

#include "ctqw/layers.hpp"

// Graph transformer layer whose attention logits carry an additive bias
// derived from the final quantum-walk probability slice.

namespace ctqw::qwgt {

struct QWGTParams {
  std::size_t heads = 4;
  Tensor w_query;  // [h, h]
  Tensor w_key;    // [h, h]
  Tensor w_value;  // [h, h]
  Linear out_proj;  // h -> h
  Linear ffn_in;    // h -> 4h
  Linear ffn_out;   // 4h -> h
  Tensor norm1_gamma, norm1_beta;
  Tensor norm2_gamma, norm2_beta;

  std::size_t hidden() const { return w_query.dim(0); }
  void register_into(ParameterSet& params, const std::string& prefix) const;
};

inline constexpr std::size_t kFfnExpansion = 4;

QWGTParams init_params(std::size_t hidden, std::size_t heads, Rng& rng);

/// B = ln(1 + P_hat), P_hat = P with each column divided by its sum.
/// Throws ContractViolation if a column sums to <= 1e-12.
Tensor structural_bias(const Tensor& p_final);

/// Attention probabilities per head, captured for inspection.
struct AttentionTrace {
  std::vector<Tensor> heads;
};

/// Multi-head attention with bias B shared by every head, residual and
/// layer norm, then relu FFN with residual and a second layer norm.
/// `bias` may be undefined to run a plain transformer encoder layer.
Tensor layer(const Tensor& nodes, const Tensor& bias, const QWGTParams& params,
             const ForwardContext& ctx, AttentionTrace* trace = nullptr);

}  // namespace ctqw::qwgt
