// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <vector>

#include "ctqw/complex_matrix.hpp"
#include "ctqw/tensor.hpp"

namespace ctqw {

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Tensor vectors;              // column k pairs with values[k]
};

inline constexpr int kMaxJacobiSweeps = 100;

/// Cyclic Jacobi rotations. Forward only: the result never lands on a tape.
/// Throws NumericError if the off-diagonal mass has not vanished after
/// kMaxJacobiSweeps sweeps.
SymmetricEigen symmetric_eig(const Tensor& matrix);

/// exp(-i H t) = V diag(exp(-i lambda t)) V^T, evaluated from the spectrum.
/// Reference path for checking cexpm_minus_iHt; not differentiable.
ComplexMatrix spectral_expm_minus_iHt(const Tensor& hamiltonian, double t);

}  // namespace ctqw
