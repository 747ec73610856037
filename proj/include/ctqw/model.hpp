// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctqw/dataset.hpp"
#include "ctqw/qwe.hpp"
#include "ctqw/qwgr.hpp"
#include "ctqw/qwgt.hpp"

namespace ctqw {

struct ModelConfig {
  std::size_t layers = 2;
  std::size_t time_steps = 4;
  std::size_t hidden = 64;
  std::size_t heads = 4;
  double dropout = 0.3;
  std::size_t num_classes = 2;
  std::size_t feature_dim = 1;
  std::size_t edge_hidden = 0;  // 0 -> hidden
  bool use_qwgt = true;
  bool use_qwgr = true;

  std::size_t resolved_edge_hidden() const { return edge_hidden ? edge_hidden : hidden; }
  std::size_t gru_hidden() const { return hidden / 2 ? hidden / 2 : 1; }
};

/// Throws ConfigError on an inconsistent configuration.
void validate(const ModelConfig& config);

enum class Ablation { none, no_qwgt, no_qwgr };

std::string to_string(Ablation which);
Ablation parse_ablation(const std::string& text);

/// Clears the flag for the removed module. Removing both is a ConfigError.
ModelConfig ablate(ModelConfig config, Ablation which);

/// A graph prepared for repeated forward passes.
struct GraphInput {
  Tensor features;  // [n, d]
  qwe::DirectedEdges edges;
  std::size_t node_count = 0;
  std::size_t label = 0;
};

GraphInput prepare(const Graph& graph);
std::vector<GraphInput> prepare(const Dataset& dataset);

/// Call counters for one or more forward passes.
struct ForwardStats {
  std::size_t ctqw_simulations = 0;
  std::size_t qwgt_calls = 0;
  std::size_t gru_encodes = 0;
};

struct LayerParams {
  std::optional<qwgt::QWGTParams> qwgt;
  std::optional<qwgr::QWGRParams> qwgr;
  Linear fusion;  // 2h -> h
};

struct ModelParams {
  qwe::QWEParams qwe;
  std::vector<LayerParams> layers;
  Linear classifier_hidden;  // h -> h/2
  Linear classifier_out;     // h/2 -> C
};

/// Quantum-walk encoder, L fused transformer/recurrent layers, mean pooling
/// and a two-layer classifier. Parameters are owned by the model and exposed
/// by name through parameters().
class Model {
 public:
  Model(const ModelConfig& config, std::uint64_t seed);
  // Parameters are shared handles; a copy would alias them.
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelConfig& config() const { return config_; }
  const ModelParams& params() const { return params_; }
  ParameterSet& parameters() { return named_; }
  const ParameterSet& parameters() const { return named_; }

  /// Class logits [C]. `rng` drives dropout and is required when `train`.
  Tensor forward(const GraphInput& graph, bool train, Rng* rng = nullptr,
                 ForwardStats* stats = nullptr) const;

  /// Node states after every layer, for inspection and tests.
  std::vector<Tensor> layer_outputs(const GraphInput& graph) const;

 private:
  Tensor run(const GraphInput& graph, const ForwardContext& ctx, ForwardStats* stats,
             std::vector<Tensor>* layer_states) const;

  ModelConfig config_;
  ModelParams params_;
  ParameterSet named_;
};

/// Cross-entropy of one graph's logits.
Tensor loss(const Tensor& logits, std::size_t label);

std::size_t predict(const Tensor& logits);

}  // namespace ctqw
