// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/qwgr.hpp"

#include <cmath>
#include <string>

#include "ctqw/errors.hpp"
#include "ctqw/ops.hpp"

namespace ctqw::qwgr {

void GRUCellParams::register_into(ParameterSet& params, const std::string& prefix) const {
  params.add(prefix + ".w_input", w_input);
  params.add(prefix + ".b_input", b_input);
  params.add(prefix + ".u_gates", u_gates);
  params.add(prefix + ".u_candidate", u_candidate);
}

void QWGRParams::register_into(ParameterSet& params, const std::string& prefix) const {
  input_proj.register_into(params, prefix + ".input_proj");
  forward.register_into(params, prefix + ".gru_forward");
  backward.register_into(params, prefix + ".gru_backward");
  readout_in.register_into(params, prefix + ".readout_in");
  readout_out.register_into(params, prefix + ".readout_out");
}

GRUCellParams init_cell(std::size_t input, std::size_t hidden, Rng& rng) {
  // Same scheme as common RNN libraries: U(-1/sqrt(h), 1/sqrt(h)) everywhere.
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  GRUCellParams c;
  c.w_input = uniform_tensor({input, 3 * hidden}, bound, rng);
  c.b_input = uniform_tensor({3 * hidden}, bound, rng);
  c.u_gates = uniform_tensor({hidden, 2 * hidden}, bound, rng);
  c.u_candidate = uniform_tensor({hidden, hidden}, bound, rng);
  return c;
}

QWGRParams init_params(std::size_t gru_hidden, std::size_t hidden, Rng& rng) {
  if (gru_hidden == 0) throw ConfigError("recurrent width must be positive");
  QWGRParams p;
  p.input_proj = make_linear(1, gru_hidden, true, rng);
  p.forward = init_cell(gru_hidden, gru_hidden, rng);
  p.backward = init_cell(gru_hidden, gru_hidden, rng);
  p.readout_in = make_linear(2 * gru_hidden, hidden, true, rng);
  p.readout_out = make_linear(hidden, hidden, true, rng);
  return p;
}

Tensor extract_diagonals(const qwe::EvolutionTensor& evolution) {
  const std::size_t n = evolution.nodes();
  std::vector<Tensor> columns;
  columns.reserve(evolution.steps());
  for (const auto& slice : evolution.slices) columns.push_back(reshape(diagonal(slice), {n, 1}));
  return concat(columns, 1);
}

Tensor gru_step(const Tensor& projected, const Tensor& h_prev, const GRUCellParams& cell) {
  const std::size_t h = cell.hidden();
  const Tensor gates = sigmoid(slice(projected, 1, 0, 2 * h) + matmul(h_prev, cell.u_gates));
  const Tensor z = slice(gates, 1, 0, h);
  const Tensor r = slice(gates, 1, h, h);
  const Tensor c = tanh(slice(projected, 1, 2 * h, h) + matmul(r * h_prev, cell.u_candidate));
  return h_prev + z * (c - h_prev);
}

Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GRUCellParams& cell) {
  return gru_step(matmul(x, cell.w_input) + cell.b_input, h_prev, cell);
}

Tensor encode_temporal(const Tensor& series, const QWGRParams& params) {
  if (series.rank() != 2) {
    throw ContractViolation("encode_temporal: expected [n, T] series, got " + to_string(series.shape()));
  }
  const std::size_t n = series.dim(0), steps = series.dim(1);
  const std::size_t width = params.forward.hidden();
  // Rows ordered (t, i) so that step t is a contiguous block of n rows.
  const Tensor embedded = params.input_proj(reshape(transpose(series), {steps * n, 1}));
  const Tensor fwd_in = matmul(embedded, params.forward.w_input) + params.forward.b_input;
  const Tensor bwd_in = matmul(embedded, params.backward.w_input) + params.backward.b_input;

  const Tensor zero({n, width}, 0.0);
  Tensor h_forward = zero;
  for (std::size_t t = 0; t < steps; ++t) {
    h_forward = gru_step(slice(fwd_in, 0, t * n, n), h_forward, params.forward);
  }
  Tensor h_backward = zero;
  for (std::size_t t = steps; t-- > 0;) {
    h_backward = gru_step(slice(bwd_in, 0, t * n, n), h_backward, params.backward);
  }
  return concat({h_forward, h_backward}, 1);
}

Tensor graph_readout(const Tensor& node_states, const QWGRParams& params) {
  return params.readout_out(relu(params.readout_in(mean(node_states, 0))));
}

}  // namespace ctqw::qwgr
