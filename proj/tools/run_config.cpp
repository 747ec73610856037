// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "ctqw/errors.hpp"

namespace ctqw::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& section, const std::string& where,
                    const std::set<std::string>& known) {
  if (!section.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, value] : section.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json& section, const std::string& where, const char* key, T& out) {
  if (!section.contains(key)) return;
  const json& v = section.at(key);
  const std::string name = where + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError("'" + name + "' must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError("'" + name + "' must be a string");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError("'" + name + "' must be a number");
  } else {
    if (!v.is_number_unsigned()) throw ConfigError("'" + name + "' must be a non-negative integer");
  }
  out = v.get<T>();
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig c;
  c.source = doc;
  reject_unknown(doc, "", {"dataset", "model", "train", "output"});
  if (doc.contains("dataset")) {
    const json& d = doc.at("dataset");
    reject_unknown(d, "dataset", {"root", "name", "fixture"});
    read(d, "dataset", "root", c.dataset_root);
    read(d, "dataset", "name", c.dataset_name);
    read(d, "dataset", "fixture", c.fixture);
  }
  ModelConfig& m = c.train.model;
  if (doc.contains("model")) {
    const json& d = doc.at("model");
    reject_unknown(d, "model", {"L", "T", "h", "heads", "dropout", "use_qwgt", "use_qwgr"});
    read(d, "model", "L", m.layers);
    read(d, "model", "T", m.time_steps);
    read(d, "model", "h", m.hidden);
    read(d, "model", "heads", m.heads);
    read(d, "model", "dropout", m.dropout);
    read(d, "model", "use_qwgt", m.use_qwgt);
    read(d, "model", "use_qwgr", m.use_qwgr);
  }
  TrainConfig& t = c.train;
  if (doc.contains("train")) {
    const json& d = doc.at("train");
    reject_unknown(d, "train",
                   {"epochs", "lr", "batch_size", "patience", "seed", "folds", "val_fraction"});
    read(d, "train", "epochs", t.epochs);
    read(d, "train", "lr", t.lr);
    read(d, "train", "batch_size", t.batch_size);
    read(d, "train", "patience", t.patience);
    read(d, "train", "seed", t.seed);
    read(d, "train", "folds", t.folds);
    read(d, "train", "val_fraction", t.val_fraction);
  }
  if (doc.contains("output")) {
    const json& d = doc.at("output");
    reject_unknown(d, "output", {"dir"});
    read(d, "output", "dir", c.output_dir);
  }
  if (!m.use_qwgt && !m.use_qwgr) throw ConfigError("model.use_qwgt and model.use_qwgr are both false");
  validate(t);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(doc);
}

std::filesystem::path resolve_dataset_root(const std::string& flag, const RunConfig& config) {
  if (!flag.empty()) return flag;
  if (!config.dataset_root.empty()) return config.dataset_root;
  if (const char* env = std::getenv("CTQW_DATA_ROOT"); env && *env) return env;
  return "data";
}

Dataset load_dataset(const RunConfig& config, const std::filesystem::path& root) {
  if (!config.fixture.empty()) {
    Dataset d = read_fixture(config.fixture);
    try {
      for (const auto& g : d.graphs) validate(g);
    } catch (const ContractViolation& e) {
      throw DatasetError(config.fixture + ": " + e.what());
    }
    return d;
  }
  if (!std::filesystem::is_directory(root / config.dataset_name)) {
    throw DatasetError("dataset directory not found: " + (root / config.dataset_name).string());
  }
  return augment_degree_features(parse_tu_dataset(root, config.dataset_name));
}

Dataset load_training_dataset(const RunConfig& config, const std::filesystem::path& root) {
  Dataset d = load_dataset(config, root);
  try {
    validate(d);
  } catch (const ContractViolation& e) {
    throw DatasetError(d.name + ": " + e.what());
  }
  return d;
}

nlohmann::json resolved_json(const RunConfig& c) {
  const ModelConfig& m = c.train.model;
  const TrainConfig& t = c.train;
  return {
      {"dataset", {{"root", c.dataset_root}, {"name", c.dataset_name}, {"fixture", c.fixture}}},
      {"model",
       {{"L", m.layers},
        {"T", m.time_steps},
        {"h", m.hidden},
        {"heads", m.heads},
        {"dropout", m.dropout},
        {"use_qwgt", m.use_qwgt},
        {"use_qwgr", m.use_qwgr}}},
      {"train",
       {{"epochs", t.epochs},
        {"lr", t.lr},
        {"batch_size", t.batch_size},
        {"patience", t.patience},
        {"seed", t.seed},
        {"folds", t.folds},
        {"val_fraction", t.val_fraction}}},
      {"output", {{"dir", c.output_dir}}},
  };
}

}  // namespace ctqw::cli
