// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ctqw/rng.hpp"
#include "ctqw/tensor.hpp"

// Differentiable primitives. Every function records a gradient rule on the
// active tape when one of its inputs requires_grad; none mutates its inputs.
//
// Binary elementwise operations broadcast when one operand's shape is a
// trailing suffix of the other's (e.g. [n, h] with [h]) or when one operand
// holds a single value.

namespace ctqw {

inline constexpr double kLayerNormEps = 1e-8;

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
inline Tensor operator-(const Tensor& a) { return scale(a, -1.0); }

// 2-D only: [m, k] x [k, n] -> [m, n].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
// Throws DomainError on any non-positive entry.
Tensor log(const Tensor& x);
Tensor square(const Tensor& x);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
Tensor reshape(const Tensor& x, Shape shape);

Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x, std::size_t axis);
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

Tensor softmax(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = kLayerNormEps);
// Inverted dropout: survivors are scaled by 1/(1-p). Identity unless `train`.
Tensor dropout(const Tensor& x, double p, bool train, Rng& rng);
// Softmax cross-entropy of a single logits vector [C] against `label`.
Tensor cross_entropy(const Tensor& logits, std::size_t label);

// Indexing helpers used to assemble graph matrices.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows);
// out[rows[e], cols[e]] += values[e]; all other entries are zero.
Tensor scatter_matrix(const Tensor& values, std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols, std::size_t n_rows, std::size_t n_cols);
Tensor diagonal(const Tensor& square_matrix);
Tensor diag_embed(const Tensor& vector);
// [k] -> [n, k], every row a copy of the input.
Tensor expand_rows(const Tensor& vector, std::size_t n);

// Throws NumericError naming `stage` if any entry is NaN or infinite.
void check_finite(const Tensor& x, std::string_view stage);

}  // namespace ctqw
