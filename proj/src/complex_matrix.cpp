// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/complex_matrix.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/ops.hpp"

namespace ctqw {

ComplexMatrix make_complex(Tensor re, Tensor im) {
  if (re.shape() != im.shape()) {
    throw ContractViolation("complex matrix parts disagree: " + to_string(re.shape()) + " vs " +
                            to_string(im.shape()));
  }
  if (re.rank() != 2) {
    throw ContractViolation("complex matrix must be 2-D, got " + to_string(re.shape()));
  }
  return {std::move(re), std::move(im)};
}

ComplexMatrix complex_identity(std::size_t n) {
  return {Tensor::identity(n), Tensor({n, n}, 0.0)};
}

ComplexMatrix cmatmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ContractViolation("cmatmul: incompatible shapes " + to_string(a.re.shape()) + " and " +
                            to_string(b.re.shape()));
  }
  return {matmul(a.re, b.re) - matmul(a.im, b.im), matmul(a.re, b.im) + matmul(a.im, b.re)};
}

Tensor abs_squared(const ComplexMatrix& z) { return square(z.re) + square(z.im); }

double infinity_norm(const Tensor& matrix) {
  const std::size_t rows = matrix.dim(0), cols = matrix.dim(1);
  double best = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < cols; ++j) row += std::abs(matrix(i, j));
    best = std::max(best, row);
  }
  return best;
}

double max_asymmetry(const Tensor& matrix) {
  const std::size_t n = matrix.dim(0);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      worst = std::max(worst, std::abs(matrix(i, j) - matrix(j, i)));
    }
  }
  return worst;
}

int scaling_exponent(const Tensor& hamiltonian, double t) {
  double scaled = std::abs(t) * infinity_norm(hamiltonian);
  int s = 0;
  while (scaled > kScalingThreshold) {
    scaled *= 0.5;
    ++s;
  }
  return s;
}

ComplexMatrix cexpm_minus_iHt(const Tensor& hamiltonian, double t) {
  if (hamiltonian.rank() != 2 || hamiltonian.dim(0) != hamiltonian.dim(1)) {
    throw ContractViolation("cexpm_minus_iHt: Hamiltonian must be square, got " +
                            to_string(hamiltonian.shape()));
  }
  if (!std::isfinite(t)) throw ContractViolation("cexpm_minus_iHt: non-finite time");
  const double asym = max_asymmetry(hamiltonian);
  if (asym > kSymmetryTolerance) {
    throw ContractViolation("cexpm_minus_iHt: Hamiltonian not symmetric (max |H - H^T| = " +
                            std::to_string(asym) + ")");
  }
  const std::size_t n = hamiltonian.dim(0);
  const int s = scaling_exponent(hamiltonian, t);
  const Tensor m = scale(hamiltonian, t / std::ldexp(1.0, s));

  // exp(-iM) = sum_k (-i)^k M^k / k!. Even powers land in the real part with
  // sign (-1)^(k/2), odd powers in the imaginary part with sign (-1)^((k+1)/2).
  Tensor re = Tensor::identity(n);
  Tensor im = scale(m, -1.0);
  Tensor power = m;
  double factorial = 1.0;
  for (int k = 2; k <= kTaylorDegree; ++k) {
    power = matmul(power, m);
    factorial *= k;
    if (k % 2 == 0) {
      const double sign = (k / 2) % 2 == 0 ? 1.0 : -1.0;
      re = re + scale(power, sign / factorial);
    } else {
      const double sign = ((k + 1) / 2) % 2 == 0 ? 1.0 : -1.0;
      im = im + scale(power, sign / factorial);
    }
  }
  ComplexMatrix u{re, im};
  for (int i = 0; i < s; ++i) u = cmatmul(u, u);
  return u;
}

}  // namespace ctqw
