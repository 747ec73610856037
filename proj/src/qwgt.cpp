// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/qwgt.hpp"

#include <cmath>
#include <string>

#include "ctqw/errors.hpp"
#include "ctqw/ops.hpp"

namespace ctqw::qwgt {

void QWGTParams::register_into(ParameterSet& params, const std::string& prefix) const {
  params.add(prefix + ".w_query", w_query);
  params.add(prefix + ".w_key", w_key);
  params.add(prefix + ".w_value", w_value);
  out_proj.register_into(params, prefix + ".out_proj");
  ffn_in.register_into(params, prefix + ".ffn_in");
  ffn_out.register_into(params, prefix + ".ffn_out");
  params.add(prefix + ".norm1.gamma", norm1_gamma);
  params.add(prefix + ".norm1.beta", norm1_beta);
  params.add(prefix + ".norm2.gamma", norm2_gamma);
  params.add(prefix + ".norm2.beta", norm2_beta);
}

QWGTParams init_params(std::size_t hidden, std::size_t heads, Rng& rng) {
  if (heads == 0 || hidden % heads != 0) {
    throw ConfigError("hidden width " + std::to_string(hidden) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  QWGTParams p;
  p.heads = heads;
  p.w_query = glorot_uniform(hidden, hidden, rng);
  p.w_key = glorot_uniform(hidden, hidden, rng);
  p.w_value = glorot_uniform(hidden, hidden, rng);
  p.out_proj = make_linear(hidden, hidden, true, rng);
  p.ffn_in = make_linear(hidden, kFfnExpansion * hidden, true, rng);
  p.ffn_out = make_linear(kFfnExpansion * hidden, hidden, true, rng);
  auto ones = [hidden] { return Tensor::parameter({hidden}, std::vector<double>(hidden, 1.0)); };
  auto zeros = [hidden] { return Tensor::parameter({hidden}, std::vector<double>(hidden, 0.0)); };
  p.norm1_gamma = ones();
  p.norm1_beta = zeros();
  p.norm2_gamma = ones();
  p.norm2_beta = zeros();
  return p;
}

Tensor structural_bias(const Tensor& p_final) {
  if (p_final.rank() != 2 || p_final.dim(0) != p_final.dim(1)) {
    throw ContractViolation("structural_bias: square probability slice required, got " +
                            to_string(p_final.shape()));
  }
  const Tensor column_sums = sum(p_final, 0);
  for (std::size_t j = 0; j < column_sums.size(); ++j) {
    if (!(column_sums[j] > 1e-12)) {
      throw ContractViolation("structural_bias: column " + std::to_string(j) +
                              " of the probability slice sums to " + std::to_string(column_sums[j]));
    }
  }
  const Tensor normalized = p_final / column_sums;
  return log(normalized + Tensor::scalar(1.0));
}

Tensor layer(const Tensor& nodes, const Tensor& bias, const QWGTParams& params,
             const ForwardContext& ctx, AttentionTrace* trace) {
  const std::size_t hidden = params.hidden();
  if (nodes.rank() != 2 || nodes.dim(1) != hidden) {
    throw ContractViolation("qwgt layer: node matrix " + to_string(nodes.shape()) +
                            " does not match hidden width " + std::to_string(hidden));
  }
  const std::size_t n = nodes.dim(0);
  if (bias.defined() && bias.shape() != Shape{n, n}) {
    throw ContractViolation("qwgt layer: bias " + to_string(bias.shape()) + " for " +
                            std::to_string(n) + " nodes");
  }
  const std::size_t head_dim = hidden / params.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));

  const Tensor q = matmul(nodes, params.w_query);
  const Tensor k = matmul(nodes, params.w_key);
  const Tensor v = matmul(nodes, params.w_value);
  std::vector<Tensor> heads;
  heads.reserve(params.heads);
  for (std::size_t hd = 0; hd < params.heads; ++hd) {
    const std::size_t off = hd * head_dim;
    const Tensor qh = slice(q, 1, off, head_dim);
    const Tensor kh = slice(k, 1, off, head_dim);
    const Tensor vh = slice(v, 1, off, head_dim);
    Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
    if (bias.defined()) scores = scores + bias;
    const Tensor attention = softmax(scores);
    if (trace) trace->heads.push_back(attention);
    heads.push_back(matmul(attention, vh));
  }
  const Tensor attended = apply_dropout(params.out_proj(concat(heads, 1)), ctx);
  const Tensor x = layer_norm(nodes + attended, params.norm1_gamma, params.norm1_beta);
  const Tensor ffn =
      apply_dropout(params.ffn_out(apply_dropout(relu(params.ffn_in(x)), ctx)), ctx);
  return layer_norm(x + ffn, params.norm2_gamma, params.norm2_beta);
}

}  // namespace ctqw::qwgt
