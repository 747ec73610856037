// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "ctqw/adam.hpp"
#include "ctqw/errors.hpp"
#include "ctqw/ops.hpp"

namespace ctqw {

namespace {

constexpr std::uint64_t kShuffleTag = 0x53485546;
constexpr std::uint64_t kDropoutTag = 0x44524f50;
constexpr std::uint64_t kModelTag = 0x4d4f444c;

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void validate(const TrainConfig& config) {
  if (config.epochs == 0) throw ConfigError("train.epochs must be positive");
  if (!(config.lr > 0.0) || !std::isfinite(config.lr)) {
    throw ConfigError("train.lr must be a positive finite number");
  }
  if (config.batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (config.folds < 2) throw ConfigError("train.folds must be at least 2");
  if (!(config.val_fraction > 0.0 && config.val_fraction < 1.0)) {
    throw ConfigError("train.val_fraction must lie in (0, 1)");
  }
  validate(config.model);
}

TrainConfig bind_to_dataset(TrainConfig config, const Dataset& dataset) {
  config.model.feature_dim = dataset.feature_dim;
  config.model.num_classes = dataset.num_classes;
  return config;
}

Evaluation evaluate(const Model& model, const std::vector<GraphInput>& inputs,
                    std::span<const std::size_t> indices) {
  if (indices.empty()) return {};
  std::size_t correct = 0;
  double total = 0.0;
  for (std::size_t idx : indices) {
    const Tensor logits = model.forward(inputs.at(idx), false);
    total += loss(logits, inputs[idx].label).item();
    if (predict(logits) == inputs[idx].label) ++correct;
  }
  const auto count = static_cast<double>(indices.size());
  return {static_cast<double>(correct) / count, total / count};
}

FoldResult train_model(Model& model, const std::vector<GraphInput>& inputs,
                       std::span<const std::size_t> train, std::span<const std::size_t> val,
                       std::span<const std::size_t> test, const TrainConfig& config,
                       std::uint64_t run_seed) {
  if (train.empty()) throw ConfigError("training split is empty");
  if (val.empty()) throw ConfigError("validation split is empty");
  const auto start = std::chrono::steady_clock::now();

  ParameterSet& params = model.parameters();
  AdamState adam = make_adam_state(params, config.lr);
  std::vector<std::size_t> order(train.begin(), train.end());

  FoldResult result;
  double best_val_loss = std::numeric_limits<double>::infinity();
  result.best_val_accuracy = -1.0;
  result.best_params = params.snapshot();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffler{run_seed, kShuffleTag, epoch};
    std::shuffle(order.begin(), order.end(), shuffler.engine());

    EpochRecord record;
    record.epoch = epoch;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      params.zero_grad();
      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t idx = order[b];
        Rng dropout_rng{run_seed, kDropoutTag, epoch, idx};
        Tape tape;
        TapeScope scope(tape);
        const Tensor logits = model.forward(inputs[idx], true, &dropout_rng);
        const Tensor l = loss(logits, inputs[idx].label);
        check_finite(l, "training loss");
        tape.backward(l);
        record.train_loss += l.item();
        if (predict(logits) == inputs[idx].label) ++correct;
      }
      params.scale_grad(1.0 / static_cast<double>(end - begin));
      adam_step(params, adam);
    }
    params.zero_grad();
    record.train_loss /= static_cast<double>(order.size());
    record.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());

    const Evaluation v = evaluate(model, inputs, val);
    record.val_accuracy = v.accuracy;
    record.val_loss = v.loss;
    result.history.push_back(record);
    result.epochs_run = epoch;

    if (v.accuracy > result.best_val_accuracy ||
        (v.accuracy == result.best_val_accuracy && v.loss < best_val_loss)) {
      result.best_val_accuracy = v.accuracy;
      best_val_loss = v.loss;
      result.best_epoch = epoch;
      result.best_params = params.snapshot();
      since_best = 0;
    } else {
      ++since_best;
    }
    if (v.accuracy >= config.target_val_accuracy) break;
    if (since_best >= config.patience) break;
  }

  params.restore(result.best_params);
  if (!test.empty()) result.test_accuracy = evaluate(model, inputs, test).accuracy;
  result.seconds = elapsed_since(start);
  return result;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t f) {
  Rng rng{seed, 0x464f4c44, f};
  return rng.next();
}

namespace {

FoldResult train_fold_prepared(const std::vector<GraphInput>& inputs, std::size_t fold_index,
                               const FoldPlan& plan, const TrainConfig& config) {
  const std::uint64_t run_seed = fold_seed(config.seed, fold_index);
  Model model(config.model, Rng{run_seed, kModelTag}.next());
  const auto train = plan.train_indices(fold_index, inputs.size());
  FoldResult r = train_model(model, inputs, train, plan.inner_val.at(fold_index),
                             plan.folds.at(fold_index), config, run_seed);
  r.fold = fold_index;
  return r;
}

}  // namespace

FoldResult train_fold(const Dataset& dataset, std::size_t fold_index, const FoldPlan& plan,
                      const TrainConfig& config) {
  const TrainConfig bound = bind_to_dataset(config, dataset);
  validate(bound);
  return train_fold_prepared(prepare(dataset), fold_index, plan, bound);
}

CVResult summarize(std::vector<double> fold_accuracies) {
  CVResult r;
  r.fold_accuracies = std::move(fold_accuracies);
  if (r.fold_accuracies.empty()) return r;
  double sum = 0.0;
  for (double a : r.fold_accuracies) sum += a;
  r.mean = sum / static_cast<double>(r.fold_accuracies.size());
  double sq = 0.0;
  for (double a : r.fold_accuracies) sq += (a - r.mean) * (a - r.mean);
  r.std = std::sqrt(sq / static_cast<double>(r.fold_accuracies.size()));
  return r;
}

CVResult cross_validate(const Dataset& dataset, const TrainConfig& config, std::ostream* log,
                        bool keep_best_params) {
  const TrainConfig bound = bind_to_dataset(config, dataset);
  validate(bound);
  const auto start = std::chrono::steady_clock::now();
  const FoldPlan plan = make_folds(dataset, bound.folds, bound.val_fraction, bound.seed);
  const std::vector<GraphInput> inputs = prepare(dataset);

  std::vector<FoldResult> results(plan.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    for (std::size_t f = next++; f < plan.size(); f = next++) {
      try {
        results[f] = train_fold_prepared(inputs, f, plan, bound);
      } catch (...) {
        std::lock_guard lock(log_mutex);
        if (!failure) failure = std::current_exception();
        next = plan.size();
        return;
      }
      if (!keep_best_params) results[f].best_params.clear();
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << "fold " << f << ": test_acc=" << results[f].test_accuracy
             << " best_val_acc=" << results[f].best_val_accuracy
             << " best_epoch=" << results[f].best_epoch << " epochs=" << results[f].epochs_run
             << " seconds=" << results[f].seconds << "\n";
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(bound.threads, 1, plan.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> accs;
  for (const auto& r : results) accs.push_back(r.test_accuracy);
  CVResult out = summarize(std::move(accs));
  out.folds = std::move(results);
  for (auto& f : out.folds) f.history.clear();
  out.config = bound;
  out.ablation = !bound.model.use_qwgt ? Ablation::no_qwgt
                 : !bound.model.use_qwgr ? Ablation::no_qwgr
                                         : Ablation::none;
  out.seconds = elapsed_since(start);
  if (log) {
    *log << dataset.name << ": mean=" << out.mean << " std=" << out.std
         << " seconds=" << out.seconds << "\n";
  }
  return out;
}

CVResult run_ablation(const Dataset& dataset, const TrainConfig& config, Ablation which,
                      std::ostream* log) {
  TrainConfig c = config;
  c.model = ablate(c.model, which);
  CVResult r = cross_validate(dataset, c, log);
  r.ablation = which;
  return r;
}

std::string to_string(SweepParameter p) {
  return p == SweepParameter::time_steps ? "T" : "L";
}

SweepParameter parse_sweep_parameter(const std::string& text) {
  if (text == "T" || text == "time_steps") return SweepParameter::time_steps;
  if (text == "L" || text == "layers") return SweepParameter::layers;
  throw ConfigError("unknown sweep parameter '" + text + "' (expected T or L)");
}

std::vector<CVResult> sweep(const Dataset& dataset, const TrainConfig& config, SweepParameter param,
                            const std::vector<std::size_t>& values, std::ostream* log) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<CVResult> out;
  for (std::size_t v : values) {
    TrainConfig c = config;
    (param == SweepParameter::time_steps ? c.model.time_steps : c.model.layers) = v;
    if (log) *log << "sweep " << to_string(param) << "=" << v << "\n";
    out.push_back(cross_validate(dataset, c, log));
  }
  return out;
}

}  // namespace ctqw
