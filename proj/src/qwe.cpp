// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/qwe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctqw/errors.hpp"
#include "ctqw/ops.hpp"

namespace ctqw::qwe {

void QWEParams::register_into(ParameterSet& params, const std::string& prefix) const {
  embed_in.register_into(params, prefix + ".embed_in");
  embed_out.register_into(params, prefix + ".embed_out");
  params.add(prefix + ".edge_w1", edge_w1);
  params.add(prefix + ".edge_w2", edge_w2);
}

QWEParams init_params(std::size_t feature_dim, std::size_t hidden, std::size_t edge_hidden, Rng& rng) {
  if (feature_dim == 0 || hidden == 0 || edge_hidden == 0) {
    throw ConfigError("encoder widths must be positive");
  }
  QWEParams p;
  p.embed_in = make_linear(feature_dim, hidden, true, rng);
  p.embed_out = make_linear(hidden, hidden, true, rng);
  p.edge_w1 = glorot_uniform(2 * hidden, edge_hidden, rng);
  p.edge_w2 = glorot_uniform(edge_hidden, 1, rng);
  return p;
}

DirectedEdges orient(const std::vector<Edge>& edges) {
  DirectedEdges out;
  out.src.reserve(2 * edges.size());
  out.dst.reserve(2 * edges.size());
  for (const auto& [i, j] : edges) {
    out.src.push_back(i);
    out.dst.push_back(j);
    out.src.push_back(j);
    out.dst.push_back(i);
  }
  return out;
}

double EvolutionTensor::at(std::size_t step, std::size_t i, std::size_t j) const {
  return std::clamp(slices.at(step)(i, j), 0.0, 1.0);
}

Tensor EvolutionTensor::stacked() const {
  const std::size_t n = nodes();
  std::vector<double> all;
  all.reserve(steps() * n * n);
  for (const auto& s : slices) all.insert(all.end(), s.values().begin(), s.values().end());
  return Tensor({steps(), n, n}, std::move(all));
}

Tensor initial_embeddings(const Tensor& features, const QWEParams& params) {
  if (features.rank() != 2 || features.dim(1) != params.embed_in.in_features()) {
    throw ContractViolation("initial_embeddings: features of shape " + to_string(features.shape()) +
                            " do not match input width " +
                            std::to_string(params.embed_in.in_features()));
  }
  return params.embed_out(relu(params.embed_in(features)));
}

Tensor edge_weights(const Tensor& h0, const DirectedEdges& edges, const QWEParams& params) {
  if (edges.size() == 0) throw ContractViolation("edge_weights: graph has no edges");
  const Tensor pairs = concat({gather_rows(h0, edges.src), gather_rows(h0, edges.dst)}, 1);
  const Tensor hidden = relu(matmul(pairs, params.edge_w1));
  return reshape(sigmoid(matmul(hidden, params.edge_w2)), {edges.size()});
}

Hamiltonian build_hamiltonian(const Tensor& weights, const DirectedEdges& edges, std::size_t n) {
  if (edges.size() == 0) return {Tensor({n, n}, 0.0)};
  const Tensor w = scatter_matrix(weights, edges.src, edges.dst, n, n);
  const Tensor a_sym = scale(w + transpose(w), 0.5);
  return {diag_embed(sum(a_sym, 1)) - a_sym};
}

Hamiltonian unit_hamiltonian(const Graph& graph) {
  const auto edges = orient(graph.edges);
  if (edges.size() == 0) return build_hamiltonian(Tensor(), edges, graph.node_count);
  return build_hamiltonian(Tensor({edges.size()}, 1.0), edges, graph.node_count);
}

void check_hamiltonian(const Hamiltonian& h) {
  const Tensor& m = h.matrix;
  if (m.rank() != 2 || m.dim(0) != m.dim(1)) {
    throw ContractViolation("Hamiltonian must be square, got " + to_string(m.shape()));
  }
  const std::size_t n = m.dim(0);
  if (max_asymmetry(m) > 1e-10) throw ContractViolation("Hamiltonian is not symmetric");
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += m(i, j);
      if (i != j && (m(i, j) > 0.0 || m(i, j) < -1.0)) {
        throw ContractViolation("Hamiltonian off-diagonal entry (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") = " + std::to_string(m(i, j)) +
                                " outside [-1, 0]");
      }
    }
    if (std::abs(row) > 1e-9) {
      throw ContractViolation("Hamiltonian row " + std::to_string(i) + " sums to " +
                              std::to_string(row));
    }
  }
}

EvolutionTensor simulate_ctqw(const Hamiltonian& h, std::size_t steps) {
  if (steps == 0) throw ContractViolation("simulate_ctqw: need at least one time step");
  check_hamiltonian(h);
  EvolutionTensor out;
  const ComplexMatrix u1 = cexpm_minus_iHt(h.matrix, 1.0);
  ComplexMatrix u = u1;
  for (std::size_t t = 1; t <= steps; ++t) {
    if (t > 1) u = cmatmul(u1, u);
    out.slices.push_back(abs_squared(u));
    out.time_grid.push_back(static_cast<double>(t));
  }
  return out;
}

Tensor probabilities_at(const Hamiltonian& h, double t) {
  check_hamiltonian(h);
  return abs_squared(cexpm_minus_iHt(h.matrix, t));
}

Encoding encode(const Tensor& features, const DirectedEdges& edges, const QWEParams& params,
                std::size_t steps) {
  Encoding enc;
  enc.h0 = initial_embeddings(features, params);
  const std::size_t n = features.dim(0);
  enc.hamiltonian = edges.size() == 0
                        ? Hamiltonian{Tensor({n, n}, 0.0)}
                        : build_hamiltonian(edge_weights(enc.h0, edges, params), edges, n);
  enc.evolution = simulate_ctqw(enc.hamiltonian, steps);
  return enc;
}

}  // namespace ctqw::qwe
