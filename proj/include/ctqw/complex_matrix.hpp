// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include "ctqw/tensor.hpp"

namespace ctqw {

/// Complex n x n matrix stored as a pair of real tensors, so that gradients
/// flow through the ordinary real primitives.
struct ComplexMatrix {
  Tensor re;
  Tensor im;

  std::size_t rows() const { return re.dim(0); }
  std::size_t cols() const { return re.dim(1); }
};

ComplexMatrix make_complex(Tensor re, Tensor im);
ComplexMatrix complex_identity(std::size_t n);

/// (A.re B.re - A.im B.im) + i (A.re B.im + A.im B.re).
ComplexMatrix cmatmul(const ComplexMatrix& a, const ComplexMatrix& b);

/// Elementwise |z|^2 = re^2 + im^2.
Tensor abs_squared(const ComplexMatrix& z);

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr int kTaylorDegree = 12;
inline constexpr double kScalingThreshold = 0.5;

/// U(t) = exp(-i H t) for real symmetric H by scaling and squaring: the
/// smallest s >= 0 with t ||H||_inf / 2^s <= 0.5 is chosen, a degree-12
/// Taylor polynomial of exp(-i H t / 2^s) is evaluated, and the result is
/// squared s times. Differentiable with respect to H.
ComplexMatrix cexpm_minus_iHt(const Tensor& hamiltonian, double t);

/// Number of squarings cexpm_minus_iHt will use for (H, t).
int scaling_exponent(const Tensor& hamiltonian, double t);

double infinity_norm(const Tensor& matrix);
double max_asymmetry(const Tensor& matrix);

}  // namespace ctqw
