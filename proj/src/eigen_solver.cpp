// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/eigen_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ctqw/errors.hpp"

namespace ctqw {

SymmetricEigen symmetric_eig(const Tensor& matrix) {
  if (matrix.rank() != 2 || matrix.dim(0) != matrix.dim(1)) {
    throw ContractViolation("symmetric_eig: square matrix required, got " +
                            to_string(matrix.shape()));
  }
  if (max_asymmetry(matrix) > kSymmetryTolerance) {
    throw ContractViolation("symmetric_eig: matrix not symmetric");
  }
  const std::size_t n = matrix.dim(0);
  auto src = matrix.values();
  std::vector<double> a(src.begin(), src.end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto at = [n](std::vector<double>& m, std::size_t i, std::size_t j) -> double& {
    return m[i * n + j];
  };

  const double frobenius = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += at(a, p, q) * at(a, p, q);
    }
    if (off == 0.0 || std::sqrt(off) <= 1e-15 * frobenius) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (apq == 0.0) continue;
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(a, k, p), akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(a, p, k), aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        at(a, p, q) = at(a, q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = at(v, k, p), vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    throw NumericError("symmetric_eig: no convergence after " + std::to_string(kMaxJacobiSweeps) +
                       " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return at(a, x, x) < at(a, y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  std::vector<double> vecs(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = at(a, order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) vecs[i * n + k] = at(v, i, order[k]);
  }
  out.vectors = Tensor({n, n}, std::move(vecs));
  return out;
}

ComplexMatrix spectral_expm_minus_iHt(const Tensor& hamiltonian, double t) {
  const auto eig = symmetric_eig(hamiltonian);
  const std::size_t n = eig.values.size();
  std::vector<double> re(n * n, 0.0), im(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = std::cos(eig.values[k] * t), s = -std::sin(eig.values[k] * t);
    for (std::size_t i = 0; i < n; ++i) {
      const double vik = eig.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) {
        const double w = vik * eig.vectors(j, k);
        re[i * n + j] += c * w;
        im[i * n + j] += s * w;
      }
    }
  }
  return {Tensor({n, n}, std::move(re)), Tensor({n, n}, std::move(im))};
}

}  // namespace ctqw
