// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ctqw/dataset.hpp"
#include "ctqw/model.hpp"

// Stratified k-fold training and evaluation.
//
// Cost notes: per graph of n nodes the walk simulation is O(T n^3) (one
// matrix exponential plus T-1 complex products), each transformer layer is
// O(n^2 h + n h^2) and each recurrent module O(n T h^2). Graphs are
// processed one at a time; per-graph gradients are summed and divided by the
// batch size.

namespace ctqw {

struct TrainConfig {
  std::size_t epochs = 300;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t patience = 30;
  std::uint64_t seed = 0;
  std::size_t folds = 10;
  double val_fraction = 0.1;
  std::size_t threads = 1;  // folds trained concurrently
  // Stop as soon as validation accuracy reaches this value (> 1 disables).
  double target_val_accuracy = 2.0;
  ModelConfig model;
};

void validate(const TrainConfig& config);

/// Copies dataset-derived sizes (feature width, class count) into the model
/// section of `config`.
TrainConfig bind_to_dataset(TrainConfig config, const Dataset& dataset);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct FoldResult {
  std::size_t fold = 0;
  double test_accuracy = 0.0;
  double best_val_accuracy = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  double seconds = 0.0;
  std::vector<double> best_params;
  std::vector<EpochRecord> history;
};

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;
};

Evaluation evaluate(const Model& model, const std::vector<GraphInput>& inputs,
                    std::span<const std::size_t> indices);

/// Mini-batch Adam on `train`, model selection on `val` (accuracy, ties
/// broken by lower loss), patience-based early stopping, then one eval-mode
/// pass over `test` with the selected parameters (skipped when empty).
/// `model` ends holding the selected parameters.
FoldResult train_model(Model& model, const std::vector<GraphInput>& inputs,
                       std::span<const std::size_t> train, std::span<const std::size_t> val,
                       std::span<const std::size_t> test, const TrainConfig& config,
                       std::uint64_t run_seed);

/// Seed used for fold `f` under master seed `seed`.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t f);

FoldResult train_fold(const Dataset& dataset, std::size_t fold_index, const FoldPlan& plan,
                      const TrainConfig& config);

struct CVResult {
  std::vector<double> fold_accuracies;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over folds
  double seconds = 0.0;
  TrainConfig config;
  Ablation ablation = Ablation::none;
  std::vector<FoldResult> folds;  // history cleared; best_params unless kept
};

/// Fills mean and population std from the fold list.
CVResult summarize(std::vector<double> fold_accuracies);

CVResult cross_validate(const Dataset& dataset, const TrainConfig& config,
                        std::ostream* log = nullptr, bool keep_best_params = false);

CVResult run_ablation(const Dataset& dataset, const TrainConfig& config, Ablation which,
                      std::ostream* log = nullptr);

enum class SweepParameter { time_steps, layers };

std::string to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& text);

std::vector<CVResult> sweep(const Dataset& dataset, const TrainConfig& config, SweepParameter param,
                            const std::vector<std::size_t>& values, std::ostream* log = nullptr);

}  // namespace ctqw
