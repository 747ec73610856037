// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ctqw/parameters.hpp"

namespace ctqw {

struct CoordinateError {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::size_t coordinates = 0;
  std::size_t passed = 0;
  double threshold = 0.0;
  double max_rel_error = 0.0;
  std::vector<CoordinateError> worst;  // descending rel_error

  double pass_fraction() const {
    return coordinates ? static_cast<double>(passed) / static_cast<double>(coordinates) : 1.0;
  }
};

struct GradCheckOptions {
  double eps = 1e-5;
  double threshold = 1e-4;
  // Denominator floor: rel = |a - n| / max(|a|, |n|, floor).
  double floor = 1e-8;
  std::size_t keep_worst = 5;
};

/// |a - n| / max(|a|, |n|, floor); 0 when both are exactly 0.
double relative_error(double analytic, double numeric, double floor);

/// Compares reverse-mode gradients of `loss_fn` against central differences
/// for every scalar of every parameter. `loss_fn` must be deterministic and
/// return a scalar tensor; it is called once under a tape and twice per
/// coordinate without one.
GradCheckReport check_gradients(ParameterSet& params, const std::function<Tensor()>& loss_fn,
                                const GradCheckOptions& options = {});

}  // namespace ctqw
