// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ctqw/dataset.hpp"
#include "ctqw/trainer.hpp"

namespace ctqw::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Parsed run configuration. See docs/formats.md for the file schema.
struct RunConfig {
  std::string dataset_root;  // empty: resolved from flag / env / "data"
  std::string dataset_name = "MUTAG";
  std::string fixture;       // single-file dataset, overrides root/name
  std::string output_dir = "results";
  TrainConfig train;
  nlohmann::json source = nlohmann::json::object();  // file contents as parsed
};

/// Throws ConfigError naming the offending key on unknown keys or wrong
/// types. Missing keys keep their defaults.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Flag > config > $CTQW_DATA_ROOT > "data".
std::filesystem::path resolve_dataset_root(const std::string& flag, const RunConfig& config);

/// Loads the fixture, or the TU dataset with degree features appended. Only
/// per-graph invariants are checked.
Dataset load_dataset(const RunConfig& config, const std::filesystem::path& root);

/// load_dataset plus the whole-dataset checks training needs (every class
/// populated, consistent feature width).
Dataset load_training_dataset(const RunConfig& config, const std::filesystem::path& root);

/// Same schema as the config file, every key present.
nlohmann::json resolved_json(const RunConfig& config);

}  // namespace ctqw::cli
