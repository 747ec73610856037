// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ctqw/errors.hpp"

namespace ctqw {

double relative_error(double analytic, double numeric, double floor) {
  const double diff = std::abs(analytic - numeric);
  if (diff == 0.0) return 0.0;
  return diff / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradCheckReport check_gradients(ParameterSet& params, const std::function<Tensor()>& loss_fn,
                                const GradCheckOptions& options) {
  params.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    const Tensor loss = loss_fn();
    tape.backward(loss);
  }

  GradCheckReport report;
  report.threshold = options.threshold;
  std::vector<CoordinateError> all;
  for (auto& entry : params.entries()) {
    const std::vector<double> analytic(entry.tensor.grad().begin(), entry.tensor.grad().end());
    auto values = entry.tensor.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + options.eps;
      const double plus = loss_fn().item();
      values[i] = original - options.eps;
      const double minus = loss_fn().item();
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      if (!std::isfinite(numeric)) {
        throw NumericError("gradient check: non-finite loss while perturbing " + entry.name);
      }
      const double rel = relative_error(analytic[i], numeric, options.floor);
      ++report.coordinates;
      if (rel <= options.threshold) ++report.passed;
      report.max_rel_error = std::max(report.max_rel_error, rel);
      all.push_back({entry.name, i, analytic[i], numeric, rel});
    }
  }
  const std::size_t keep = std::min(options.keep_worst, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    [](const auto& a, const auto& b) { return a.rel_error > b.rel_error; });
  all.resize(keep);
  report.worst = std::move(all);
  params.zero_grad();
  return report;
}

}  // namespace ctqw
