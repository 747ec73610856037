// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ctqw {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;

  std::vector<double>& grad_buffer() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Dense row-major double tensor with reference semantics: copies share the
/// same storage, like a handle. Rank 0 (shape {}) is a scalar.
///
/// A tensor participates in differentiation when it requires_grad. Leaves are
/// created with Tensor::parameter; results of operations inherit the flag when
/// a Tape is active (see TapeScope) and at least one input requires_grad.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor parameter(Shape shape, std::vector<double> values);
  static Tensor identity(std::size_t n);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t dim(std::size_t axis) const;

  std::span<const double> values() const;
  // Direct write access, for leaves only (initialization, optimizer updates).
  std::span<double> mutable_values();

  double item() const;
  double operator[](std::size_t flat) const { return values()[flat]; }
  double operator()(std::size_t row, std::size_t col) const;
  double operator()(std::size_t a, std::size_t b, std::size_t c) const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  // Zero-filled when nothing has flowed into this tensor yet.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Copy of the values with no gradient participation.
  Tensor detach() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  friend Tensor make_tensor(Shape shape, std::vector<double> values, bool requires_grad);

  std::shared_ptr<detail::Node> node_;
};

Tensor make_tensor(Shape shape, std::vector<double> values, bool requires_grad);

/// Ordered record of gradient rules for the operations executed while the
/// tape was active. Rules are appended in execution order, so replaying them
/// in reverse is a valid topological order.
class Tape {
 public:
  using Rule = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(Rule rule);

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded rule in reverse.
  /// Gradients accumulate into existing grad buffers. One call per tape.
  void backward(const Tensor& loss);

  std::size_t size() const { return rules_.size(); }
  bool consumed() const { return consumed_; }

 private:
  std::vector<Rule> rules_;
  bool consumed_ = false;
};

/// Makes `tape` the recording target of the current thread for the scope's
/// lifetime. Scopes nest; the previous tape is restored on exit.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

}  // namespace ctqw
