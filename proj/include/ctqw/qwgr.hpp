// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include "ctqw/layers.hpp"
#include "ctqw/qwe.hpp"

// Recurrent encoder over each node's return-probability series
// s_i[t] = P(t)_ii, summarised into one graph-level vector.

namespace ctqw::qwgr {

/// Standard GRU cell with the three input projections and the two gate
/// recurrences stored side by side (column blocks update | reset | candidate).
struct GRUCellParams {
  Tensor w_input;      // [in, 3 h_g]
  Tensor b_input;      // [3 h_g]
  Tensor u_gates;      // [h_g, 2 h_g]
  Tensor u_candidate;  // [h_g, h_g]

  std::size_t hidden() const { return u_candidate.dim(0); }
  void register_into(ParameterSet& params, const std::string& prefix) const;
};

struct QWGRParams {
  Linear input_proj;  // 1 -> h_g
  GRUCellParams forward;
  GRUCellParams backward;
  Linear readout_in;   // 2 h_g -> h
  Linear readout_out;  // h -> h

  void register_into(ParameterSet& params, const std::string& prefix) const;
};

GRUCellParams init_cell(std::size_t input, std::size_t hidden, Rng& rng);
QWGRParams init_params(std::size_t gru_hidden, std::size_t hidden, Rng& rng);

/// [n, T] matrix of return probabilities.
Tensor extract_diagonals(const qwe::EvolutionTensor& evolution);

/// z = sigmoid(x Wz + h Uz + bz), r = sigmoid(x Wr + h Ur + br),
/// c = tanh(x Wc + (r * h) Uc + bc), h' = (1 - z) * h + z * c.
/// Rows of x and h_prev are independent sequences.
Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GRUCellParams& cell);

/// gru_cell with the input term x W + b already computed ([n, 3 h_g]).
Tensor gru_step(const Tensor& projected, const Tensor& h_prev, const GRUCellParams& cell);

/// Per node: project every scalar step to h_g, run the forward cell over
/// t = 1..T and the backward cell over t = T..1 from zero states, and
/// concatenate the two final states. Returns [n, 2 h_g].
Tensor encode_temporal(const Tensor& series, const QWGRParams& params);

/// FFN(mean over nodes), FFN = Linear -> relu -> Linear. Returns [h].
Tensor graph_readout(const Tensor& node_states, const QWGRParams& params);

}  // namespace ctqw::qwgr
