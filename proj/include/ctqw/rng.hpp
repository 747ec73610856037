// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ctqw {

/// Deterministic generator keyed by a tuple of integers, e.g.
/// {run_seed, fold, epoch, graph}. Two generators with the same key produce
/// the same stream regardless of what else ran before them.
class Rng {
 public:
  explicit Rng(std::initializer_list<std::uint64_t> key) : engine_(seed_from(key)) {}
  explicit Rng(const std::vector<std::uint64_t>& key) : engine_(seed_from(key)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  std::uint64_t next() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  template <typename Range>
  static std::mt19937_64 seed_from(const Range& key) {
    std::vector<std::uint32_t> words;
    for (auto k : key) {
      words.push_back(static_cast<std::uint32_t>(k));
      words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
};

}  // namespace ctqw
