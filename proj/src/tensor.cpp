// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/tensor.hpp"

#include <numeric>
#include <sstream>

#include "ctqw/errors.hpp"

namespace ctqw {

namespace {
thread_local Tape* g_active_tape = nullptr;
}

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor make_tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (numel(shape) != values.size()) {
    throw ContractViolation("tensor of shape " + to_string(shape) + " given " +
                            std::to_string(values.size()) + " values");
  }
  for (auto d : shape) {
    if (d == 0) throw ContractViolation("tensor dimensions must be positive, got " + to_string(shape));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor::Tensor(Shape shape, double fill) {
  const auto n = numel(shape);
  *this = make_tensor(std::move(shape), std::vector<double>(n, fill), false);
}

Tensor::Tensor(Shape shape, std::vector<double> values) {
  *this = make_tensor(std::move(shape), std::move(values), false);
}

Tensor Tensor::scalar(double value) { return make_tensor({}, {value}, false); }

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  return make_tensor(std::move(shape), std::move(values), true);
}

Tensor Tensor::identity(std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return make_tensor({n, n}, std::move(v), false);
}

const Shape& Tensor::shape() const {
  if (!node_) throw ContractViolation("use of undefined tensor");
  return node_->shape;
}

std::size_t Tensor::size() const { return node_ ? node_->value.size() : 0; }

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw ContractViolation("axis " + std::to_string(axis) + " out of range for shape " + to_string(s));
  }
  return s[axis];
}

std::span<const double> Tensor::values() const {
  if (!node_) throw ContractViolation("use of undefined tensor");
  return node_->value;
}

std::span<double> Tensor::mutable_values() {
  if (!node_) throw ContractViolation("use of undefined tensor");
  return node_->value;
}

double Tensor::item() const {
  if (size() != 1) throw ContractViolation("item() on tensor of shape " + to_string(shape()));
  return node_->value[0];
}

double Tensor::operator()(std::size_t row, std::size_t col) const {
  return node_->value[row * node_->shape[1] + col];
}

double Tensor::operator()(std::size_t a, std::size_t b, std::size_t c) const {
  return node_->value[(a * node_->shape[1] + b) * node_->shape[2] + c];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  if (!node_) throw ContractViolation("use of undefined tensor");
  node_->requires_grad = flag;
}

std::span<const double> Tensor::grad() const {
  if (!node_) throw ContractViolation("use of undefined tensor");
  return node_->grad_buffer();
}

std::span<double> Tensor::mutable_grad() {
  if (!node_) throw ContractViolation("use of undefined tensor");
  return node_->grad_buffer();
}

void Tensor::zero_grad() {
  if (!node_) return;
  node_->grad.assign(node_->value.size(), 0.0);
}

Tensor Tensor::detach() const {
  return make_tensor(shape(), node_->value, false);
}

void Tape::record(Rule rule) {
  if (consumed_) throw ContractViolation("recording onto a tape that already ran backward");
  rules_.push_back(std::move(rule));
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw ContractViolation("backward called twice on one tape");
  if (loss.size() != 1) {
    throw ContractViolation("backward requires a scalar loss, got shape " + to_string(loss.shape()));
  }
  consumed_ = true;
  if (loss.requires_grad()) {
    loss.node()->grad_buffer()[0] += 1.0;
    for (auto it = rules_.rbegin(); it != rules_.rend(); ++it) (*it)();
  }
  rules_.clear();
  rules_.shrink_to_fit();
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }

TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

}  // namespace ctqw
