// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/model.hpp"

#include <algorithm>
#include <string>

#include "ctqw/errors.hpp"
#include "ctqw/ops.hpp"

namespace ctqw {

void validate(const ModelConfig& c) {
  if (c.layers < 1) throw ConfigError("model.L must be at least 1");
  if (c.time_steps < 1) throw ConfigError("model.T must be at least 1");
  if (c.hidden < 2) throw ConfigError("model.h must be at least 2");
  if (c.heads < 1 || c.hidden % c.heads != 0) {
    throw ConfigError("model.h = " + std::to_string(c.hidden) + " is not divisible by model.heads = " +
                      std::to_string(c.heads));
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("model.dropout must lie in [0, 1)");
  if (c.num_classes < 2) throw ConfigError("need at least two classes");
  if (c.feature_dim < 1) throw ConfigError("feature width must be at least 1");
  if (!c.use_qwgt && !c.use_qwgr) {
    throw ConfigError("at least one of use_qwgt / use_qwgr must stay enabled");
  }
}

std::string to_string(Ablation which) {
  switch (which) {
    case Ablation::none: return "none";
    case Ablation::no_qwgt: return "no_qwgt";
    case Ablation::no_qwgr: return "no_qwgr";
  }
  return "none";
}

Ablation parse_ablation(const std::string& text) {
  if (text == "none") return Ablation::none;
  if (text == "no_qwgt") return Ablation::no_qwgt;
  if (text == "no_qwgr") return Ablation::no_qwgr;
  throw ConfigError("unknown ablation '" + text + "' (expected no_qwgt or no_qwgr)");
}

ModelConfig ablate(ModelConfig config, Ablation which) {
  if (which == Ablation::no_qwgt) config.use_qwgt = false;
  if (which == Ablation::no_qwgr) config.use_qwgr = false;
  if (!config.use_qwgt && !config.use_qwgr) {
    throw ConfigError("ablation would remove both the transformer and the recurrent module");
  }
  return config;
}

GraphInput prepare(const Graph& graph) {
  validate(graph);
  GraphInput in;
  in.features = Tensor({graph.node_count, graph.feature_dim}, graph.features);
  in.edges = qwe::orient(graph.edges);
  in.node_count = graph.node_count;
  in.label = graph.label;
  return in;
}

std::vector<GraphInput> prepare(const Dataset& dataset) {
  std::vector<GraphInput> out;
  out.reserve(dataset.graphs.size());
  for (const auto& g : dataset.graphs) out.push_back(prepare(g));
  return out;
}

Model::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  validate(config_);
  Rng rng({seed, 0x494e4954});
  const std::size_t h = config_.hidden;
  params_.qwe = qwe::init_params(config_.feature_dim, h, config_.resolved_edge_hidden(), rng);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    LayerParams layer;
    if (config_.use_qwgt) layer.qwgt = qwgt::init_params(h, config_.heads, rng);
    if (config_.use_qwgr) layer.qwgr = qwgr::init_params(config_.gru_hidden(), h, rng);
    layer.fusion = make_linear(2 * h, h, true, rng);
    params_.layers.push_back(std::move(layer));
  }
  const std::size_t half = std::max<std::size_t>(h / 2, 1);
  params_.classifier_hidden = make_linear(h, half, true, rng);
  params_.classifier_out = make_linear(half, config_.num_classes, true, rng);

  params_.qwe.register_into(named_, "qwe");
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    const std::string prefix = "layers." + std::to_string(l);
    const auto& layer = params_.layers[l];
    if (layer.qwgt) layer.qwgt->register_into(named_, prefix + ".qwgt");
    if (layer.qwgr) layer.qwgr->register_into(named_, prefix + ".qwgr");
    layer.fusion.register_into(named_, prefix + ".fusion");
  }
  params_.classifier_hidden.register_into(named_, "classifier.hidden");
  params_.classifier_out.register_into(named_, "classifier.out");
}

Tensor Model::forward(const GraphInput& graph, bool train, Rng* rng, ForwardStats* stats) const {
  ForwardContext ctx{train, config_.dropout, rng};
  return run(graph, ctx, stats, nullptr);
}

std::vector<Tensor> Model::layer_outputs(const GraphInput& graph) const {
  std::vector<Tensor> states;
  run(graph, ForwardContext{}, nullptr, &states);
  return states;
}

Tensor Model::run(const GraphInput& graph, const ForwardContext& ctx, ForwardStats* stats,
                  std::vector<Tensor>* layer_states) const {
  if (graph.features.dim(1) != config_.feature_dim) {
    throw ContractViolation("graph has " + std::to_string(graph.features.dim(1)) +
                            " features, model expects " + std::to_string(config_.feature_dim));
  }
  const std::size_t n = graph.node_count;
  const auto enc = qwe::encode(graph.features, graph.edges, params_.qwe, config_.time_steps);
  if (stats) ++stats->ctqw_simulations;
  check_finite(enc.h0, "encoder embeddings");
  for (const auto& s : enc.evolution.slices) check_finite(s, "quantum walk evolution");

  Tensor series;
  if (config_.use_qwgr) series = qwgr::extract_diagonals(enc.evolution);

  Tensor nodes = enc.h0;
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    const auto& layer = params_.layers[l];
    Tensor transformed = nodes;
    if (layer.qwgt) {
      const Tensor bias = qwgt::structural_bias(enc.evolution.final_slice());
      transformed = qwgt::layer(nodes, bias, *layer.qwgt, ctx);
      if (stats) ++stats->qwgt_calls;
    }
    Tensor graph_vector;
    if (layer.qwgr) {
      graph_vector = qwgr::graph_readout(qwgr::encode_temporal(series, *layer.qwgr), *layer.qwgr);
      if (stats) ++stats->gru_encodes;
    } else {
      graph_vector = Tensor({config_.hidden}, 0.0);
    }
    const Tensor fused = concat({transformed, expand_rows(graph_vector, n)}, 1);
    nodes = apply_dropout(relu(layer.fusion(fused)), ctx);
    check_finite(nodes, "layer " + std::to_string(l) + " fusion");
    if (layer_states) layer_states->push_back(nodes);
  }
  const Tensor pooled = mean(nodes, 0);
  const Tensor logits = params_.classifier_out(relu(params_.classifier_hidden(pooled)));
  check_finite(logits, "classifier logits");
  return logits;
}

Tensor loss(const Tensor& logits, std::size_t label) { return cross_entropy(logits, label); }

std::size_t predict(const Tensor& logits) {
  auto v = logits.values();
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace ctqw
