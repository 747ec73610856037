// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <vector>

#include "ctqw/complex_matrix.hpp"
#include "ctqw/dataset.hpp"
#include "ctqw/layers.hpp"

// Quantum walk encoder: a feature-dependent weighted Laplacian serves as the
// Hamiltonian of a continuous-time quantum walk started from every node.

namespace ctqw::qwe {

struct QWEParams {
  Linear embed_in;   // d -> h
  Linear embed_out;  // h -> h
  Tensor edge_w1;    // [2h, h_e]
  Tensor edge_w2;    // [h_e, 1]

  std::size_t hidden() const { return embed_out.out_features(); }
  void register_into(ParameterSet& params, const std::string& prefix) const;
};

QWEParams init_params(std::size_t feature_dim, std::size_t hidden, std::size_t edge_hidden, Rng& rng);

/// Both orientations of every undirected edge: (i, j) at position 2e and
/// (j, i) at 2e + 1.
struct DirectedEdges {
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;

  std::size_t size() const { return src.size(); }
};

DirectedEdges orient(const std::vector<Edge>& edges);

struct Hamiltonian {
  Tensor matrix;  // n x n
};

/// P(t)_{ij}: probability of finding the walker at node i at time t given it
/// started on node j. One slice per time on the grid.
struct EvolutionTensor {
  std::vector<Tensor> slices;
  std::vector<double> time_grid;

  std::size_t steps() const { return slices.size(); }
  std::size_t nodes() const { return slices.front().dim(0); }
  const Tensor& final_slice() const { return slices.back(); }
  // Entry clamped to [0, 1].
  double at(std::size_t step, std::size_t i, std::size_t j) const;
  // [T, n, n] stacked copy.
  Tensor stacked() const;
};

/// H^(0) = Linear(relu(Linear(X))).
Tensor initial_embeddings(const Tensor& features, const QWEParams& params);

/// w_ij = sigmoid(W2 relu(W1 [H0_i || H0_j])) for every directed orientation;
/// returns a vector of length edges.size().
Tensor edge_weights(const Tensor& h0, const DirectedEdges& edges, const QWEParams& params);

/// W from the directed weights, A = (W + W^T) / 2, H = diag(A 1) - A.
Hamiltonian build_hamiltonian(const Tensor& weights, const DirectedEdges& edges, std::size_t n);

/// Laplacian with every directed weight equal to 1.
Hamiltonian unit_hamiltonian(const Graph& graph);

/// Throws ContractViolation unless H is symmetric (1e-10), has zero row sums
/// (1e-9) and off-diagonal entries in [-1, 0].
void check_hamiltonian(const Hamiltonian& h);

/// Evolution over the grid t = 1..T. U(1) is computed once and later steps
/// use U(t+1) = U(1) U(t).
EvolutionTensor simulate_ctqw(const Hamiltonian& h, std::size_t steps);

/// |exp(-iHt)|^2 for a single, not necessarily integer, time.
Tensor probabilities_at(const Hamiltonian& h, double t);

struct Encoding {
  Tensor h0;
  Hamiltonian hamiltonian;
  EvolutionTensor evolution;
};

Encoding encode(const Tensor& features, const DirectedEdges& edges, const QWEParams& params,
                std::size_t steps);

}  // namespace ctqw::qwe
