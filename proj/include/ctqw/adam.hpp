// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <vector>

#include "ctqw/parameters.hpp"

namespace ctqw {

struct AdamState {
  long step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam_state(const ParameterSet& params, double lr = 1e-3);

/// One bias-corrected Adam update using each parameter's accumulated grad.
/// Throws NumericError naming the first parameter with a non-finite gradient;
/// nothing is modified in that case.
void adam_step(ParameterSet& params, AdamState& state);

}  // namespace ctqw
