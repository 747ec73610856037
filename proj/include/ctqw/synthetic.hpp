// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <cstdint>
#include <vector>

#include "ctqw/dataset.hpp"
#include "ctqw/rng.hpp"
#include "ctqw/tensor.hpp"

// Random graphs and permutations for property tests and tooling.

namespace ctqw {

/// Erdos-Renyi G(n, p) plus a random spanning path, so the result is
/// connected. Features are uniform in [0, 1).
Graph random_graph(std::size_t n, double edge_prob, std::size_t feature_dim, Rng& rng);

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

/// Node i of `graph` becomes node perm[i].
Graph permute(const Graph& graph, const std::vector<std::size_t>& perm);

/// D - A for a random graph with edge weights in (0, 1]. May be
/// disconnected.
Tensor random_laplacian(std::size_t n, double edge_prob, Rng& rng);

/// Two-class toy set: class 0 graphs are cycles, class 1 graphs are stars,
/// both with a few random extra edges and a constant feature.
Dataset synthetic_dataset(std::size_t graphs, std::size_t min_nodes, std::size_t max_nodes,
                          std::uint64_t seed);

}  // namespace ctqw
