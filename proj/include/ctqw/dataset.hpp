// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ctqw {

using Edge = std::pair<std::size_t, std::size_t>;

/// One labelled input graph. Edges are undirected, stored once with
/// first < second, sorted, with no self-loops. Features are row-major
/// node_count x feature_dim.
struct Graph {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  std::size_t feature_dim = 0;
  std::vector<double> features;
  std::size_t label = 0;

  std::vector<std::size_t> degrees() const;
  bool operator==(const Graph&) const = default;
};

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;

  std::vector<std::size_t> labels() const;
  std::size_t max_nodes() const;
  bool operator==(const Dataset&) const = default;
};

/// Sorts, deduplicates and drops self-loops; (i, j) and (j, i) collapse.
std::vector<Edge> normalize_edges(std::vector<Edge> edges);

/// Throws ContractViolation if the graph or dataset breaks its invariants.
void validate(const Graph& graph);
void validate(const Dataset& dataset);

/// Reads root_dir/name/name_{A,graph_indicator,graph_labels}.txt and the
/// optional name_node_labels.txt / name_node_attributes.txt. Node labels are
/// one-hot encoded over the values seen in the whole dataset (ascending);
/// attributes follow the one-hot block. Graph labels are remapped to [0, C)
/// in ascending order of their raw values.
Dataset parse_tu_dataset(const std::filesystem::path& root_dir, const std::string& name);

/// Appends ln(1 + deg) / ln(1 + deg_max) to every node, deg_max taken over
/// the whole dataset. When every graph is edgeless the feature is 0 and a
/// warning is logged. Call exactly once per dataset.
Dataset augment_degree_features(const Dataset& dataset);

/// Line-oriented single-file format used by tests and small tools:
///   N C d
///   then per graph: "n m label", n rows of d reals, m rows "i j" (0-based).
void write_fixture(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_fixture(const std::filesystem::path& path);

/// Stratified k-fold assignment with an inner validation split per fold.
struct FoldPlan {
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> folds;      // test indices, sorted
  std::vector<std::vector<std::size_t>> inner_val;  // per fold, sorted

  std::size_t size() const { return folds.size(); }
  // Indices neither in fold `f`'s test set nor in its validation set.
  std::vector<std::size_t> train_indices(std::size_t f, std::size_t total) const;
};

FoldPlan make_folds(const Dataset& dataset, std::size_t k = 10, double val_fraction = 0.1,
                    std::uint64_t seed = 0);

}  // namespace ctqw
