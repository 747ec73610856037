// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <gtest/gtest.h>

#include <functional>
#include <string>
#include <vector>

#include "ctqw/gradcheck.hpp"
#include "ctqw/ops.hpp"
#include "ctqw/rng.hpp"

namespace ctqw::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(v));
}

inline Tensor random_parameter(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = random_tensor(std::move(shape), rng, lo, hi);
  t.set_requires_grad(true);
  return t;
}

// Reduces an arbitrary output to a scalar with fixed random weights so that
// every output coordinate contributes to the checked gradient.
inline Tensor weighted_sum(const Tensor& out, std::uint64_t seed = 99) {
  Rng rng{seed};
  const Tensor w = random_tensor(out.shape(), rng);
  return sum_all(out * w);
}

inline std::string describe(const GradCheckReport& report) {
  std::string out = std::to_string(report.passed) + "/" + std::to_string(report.coordinates) + " passed";
  for (const auto& w : report.worst) {
    out += "\n  " + w.parameter + "[" + std::to_string(w.index) + "] analytic=" +
           std::to_string(w.analytic) + " numeric=" + std::to_string(w.numeric) +
           " rel=" + std::to_string(w.rel_error);
  }
  return out;
}

// Finite-difference check of f(inputs) for each input tensor.
inline void expect_gradients(std::vector<Tensor> inputs,
                             const std::function<Tensor(const std::vector<Tensor>&)>& f,
                             double threshold = 1e-6, double floor = 1e-6) {
  ParameterSet params;
  for (std::size_t i = 0; i < inputs.size(); ++i) params.add("in" + std::to_string(i), inputs[i]);
  GradCheckOptions opts;
  opts.threshold = threshold;
  opts.floor = floor;
  const auto report = check_gradients(params, [&] { return weighted_sum(f(inputs)); }, opts);
  EXPECT_EQ(report.passed, report.coordinates) << describe(report);
}

}  // namespace ctqw::testing
