// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/synthetic.hpp"

#include <algorithm>
#include <numeric>

#include "ctqw/errors.hpp"

namespace ctqw {

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  return perm;
}

Graph random_graph(std::size_t n, double edge_prob, std::size_t feature_dim, Rng& rng) {
  if (n == 0) throw ContractViolation("random_graph: n must be positive");
  Graph g;
  g.node_count = n;
  g.feature_dim = feature_dim;
  const auto order = random_permutation(n, rng);
  for (std::size_t k = 1; k < n; ++k) g.edges.emplace_back(order[k - 1], order[k]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < edge_prob) g.edges.emplace_back(i, j);
    }
  }
  g.edges = normalize_edges(std::move(g.edges));
  g.features.resize(n * feature_dim);
  for (auto& f : g.features) f = rng.uniform();
  return g;
}

Graph permute(const Graph& graph, const std::vector<std::size_t>& perm) {
  if (perm.size() != graph.node_count) throw ContractViolation("permute: size mismatch");
  Graph out = graph;
  out.edges.clear();
  for (auto [i, j] : graph.edges) out.edges.emplace_back(perm[i], perm[j]);
  out.edges = normalize_edges(std::move(out.edges));
  const std::size_t d = graph.feature_dim;
  for (std::size_t i = 0; i < graph.node_count; ++i) {
    std::copy_n(graph.features.begin() + static_cast<std::ptrdiff_t>(i * d), d,
                out.features.begin() + static_cast<std::ptrdiff_t>(perm[i] * d));
  }
  return out;
}

Tensor random_laplacian(std::size_t n, double edge_prob, Rng& rng) {
  Tensor h({n, n}, 0.0);
  auto v = h.mutable_values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() >= edge_prob) continue;
      const double w = 1.0 - rng.uniform();  // (0, 1]
      v[i * n + j] -= w;
      v[j * n + i] -= w;
      v[i * n + i] += w;
      v[j * n + j] += w;
    }
  }
  return h;
}

Dataset synthetic_dataset(std::size_t graphs, std::size_t min_nodes, std::size_t max_nodes,
                          std::uint64_t seed) {
  if (min_nodes < 3 || max_nodes < min_nodes) {
    throw ConfigError("synthetic_dataset: need 3 <= min_nodes <= max_nodes");
  }
  Rng rng{seed, 0x53594e};
  Dataset ds;
  ds.name = "synthetic";
  ds.num_classes = 2;
  ds.feature_dim = 1;
  for (std::size_t k = 0; k < graphs; ++k) {
    Graph g;
    g.label = k % 2;
    g.node_count = min_nodes + static_cast<std::size_t>(rng.next() % (max_nodes - min_nodes + 1));
    g.feature_dim = 1;
    g.features.assign(g.node_count, 1.0);
    const std::size_t n = g.node_count;
    for (std::size_t i = 1; i < n; ++i) {
      g.edges.emplace_back(g.label == 0 ? i - 1 : 0, i);
    }
    if (g.label == 0) g.edges.emplace_back(0, n - 1);
    const std::size_t extra = rng.next() % 2;
    for (std::size_t e = 0; e < extra; ++e) {
      g.edges.emplace_back(rng.next() % n, rng.next() % n);
    }
    g.edges = normalize_edges(std::move(g.edges));
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

}  // namespace ctqw
