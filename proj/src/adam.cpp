// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/adam.hpp"

#include <cmath>
#include <string>

#include "ctqw/errors.hpp"

namespace ctqw {

AdamState make_adam_state(const ParameterSet& params, double lr) {
  AdamState state;
  state.lr = lr;
  for (const auto& e : params.entries()) {
    state.m.emplace_back(e.tensor.size(), 0.0);
    state.v.emplace_back(e.tensor.size(), 0.0);
  }
  return state;
}

void adam_step(ParameterSet& params, AdamState& state) {
  auto& entries = params.entries();
  if (state.m.size() != entries.size() || state.v.size() != entries.size()) {
    throw ContractViolation("adam_step: optimizer state does not match parameter set");
  }
  for (std::size_t p = 0; p < entries.size(); ++p) {
    if (state.m[p].size() != entries[p].tensor.size()) {
      throw ContractViolation("adam_step: moment shape mismatch for " + entries[p].name);
    }
    for (double g : entries[p].tensor.grad()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + entries[p].name);
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < entries.size(); ++p) {
    auto w = entries[p].tensor.mutable_values();
    auto g = entries[p].tensor.grad();
    auto& m = state.m[p];
    auto& v = state.v[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      w[i] -= state.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.eps);
    }
  }
}

}  // namespace ctqw
