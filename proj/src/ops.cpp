// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include "ctqw/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "ctqw/errors.hpp"

namespace ctqw {

namespace {

using NodePtr = std::shared_ptr<detail::Node>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (active_tape() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

Tensor result(Shape shape, std::vector<double> values, bool track, [[maybe_unused]] const char* op) {
  auto out = make_tensor(std::move(shape), std::move(values), track);
#ifndef NDEBUG
  check_finite(out, op);
#endif
  return out;
}

template <typename Rule>
void record(Rule&& rule) {
  active_tape()->record(std::forward<Rule>(rule));
}

// Splits a shape around `axis` into (outer, length, inner) extents.
struct AxisSplit {
  std::size_t outer = 1, length = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.length = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

void require_axis(const Tensor& x, std::size_t axis, const char* op) {
  if (axis >= x.rank()) {
    throw ContractViolation(std::string(op) + ": axis " + std::to_string(axis) +
                            " out of range for shape " + to_string(x.shape()));
  }
}

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
  if (x.rank() != rank) {
    throw ContractViolation(std::string(op) + ": expected rank " + std::to_string(rank) +
                            ", got shape " + to_string(x.shape()));
  }
}

bool is_suffix(const Shape& small, const Shape& big) {
  return small.size() <= big.size() && std::equal(small.rbegin(), small.rend(), big.rbegin());
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  if (a == b) return a;
  if (numel(b) == 1) return a;
  if (numel(a) == 1) return b;
  if (is_suffix(b, a)) return a;
  if (is_suffix(a, b)) return b;
  throw ContractViolation(std::string(op) + ": incompatible shapes " + to_string(a) + " and " +
                          to_string(b));
}

// Visits (i, i mod na, i mod nb) for i < n without dividing.
template <typename F>
void for_broadcast(std::size_t n, std::size_t na, std::size_t nb, F&& f) {
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < n; ++i) {
    f(i, ia, ib);
    if (++ia == na) ia = 0;
    if (++ib == nb) ib = 0;
  }
}

template <typename Fwd, typename DA, typename DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, Fwd f, DA da, DB db) {
  Shape shape = broadcast_shape(a.shape(), b.shape(), op);
  const std::size_t n = numel(shape), na = a.size(), nb = b.size();
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(n);
  if (na == n && nb == n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(av[i], bv[i]);
  } else {
    for_broadcast(n, na, nb, [&](std::size_t i, std::size_t ia, std::size_t ib) { out[i] = f(av[ia], bv[ib]); });
  }
  const bool track = tracking({&a, &b});
  Tensor r = result(std::move(shape), std::move(out), track, op);
  if (track) {
    record([an = a.node(), bn = b.node(), on = r.node(), da, db] {
      if (on->grad.empty()) return;
      const auto& g = on->grad;
      const auto& x = an->value;
      const auto& y = bn->value;
      const std::size_t n = g.size(), na = x.size(), nb = y.size();
      if (an->requires_grad) {
        auto& ga = an->grad_buffer();
        for_broadcast(n, na, nb, [&](std::size_t i, std::size_t ia, std::size_t ib) {
          ga[ia] += g[i] * da(x[ia], y[ib]);
        });
      }
      if (bn->requires_grad) {
        auto& gb = bn->grad_buffer();
        for_broadcast(n, na, nb, [&](std::size_t i, std::size_t ia, std::size_t ib) {
          gb[ib] += g[i] * db(x[ia], y[ib]);
        });
      }
    });
  }
  return r;
}

// Elementwise map whose derivative is expressed through input and output.
template <typename Fwd, typename D>
Tensor unary(const Tensor& x, const char* op, Fwd f, D d) {
  auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  const bool track = tracking({&x});
  Tensor r = result(x.shape(), std::move(out), track, op);
  if (track) {
    record([xn = x.node(), on = r.node(), d] {
      if (on->grad.empty()) return;
      auto& gx = xn->grad_buffer();
      const auto& g = on->grad;
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * d(xn->value[i], on->value[i]);
    });
  }
  return r;
}

double stable_sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  for (double v : b.values()) {
    if (v == 0.0) throw DomainError("div: division by zero");
  }
  return binary(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; }, [](double x, double y) { return -x / (y * y); });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, "scale", [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ContractViolation("matmul: incompatible shapes " + to_string(a.shape()) + " and " +
                            to_string(b.shape()));
  }
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() =
      ConstMap(a.values().data(), m, k) * ConstMap(b.values().data(), k, n);
  const bool track = tracking({&a, &b});
  Tensor r = result({m, n}, std::move(out), track, "matmul");
  if (track) {
    record([an = a.node(), bn = b.node(), on = r.node(), m, k, n] {
      if (on->grad.empty()) return;
      ConstMap g(on->grad.data(), m, n);
      if (an->requires_grad) {
        MutMap(an->grad_buffer().data(), m, k).noalias() +=
            g * ConstMap(bn->value.data(), k, n).transpose();
      }
      if (bn->requires_grad) {
        MutMap(bn->grad_buffer().data(), k, n).noalias() +=
            ConstMap(an->value.data(), m, k).transpose() * g;
      }
    });
  }
  return r;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  MutMap(out.data(), n, m) = ConstMap(a.values().data(), m, n).transpose();
  const bool track = tracking({&a});
  Tensor r = result({n, m}, std::move(out), track, "transpose");
  if (track) {
    record([an = a.node(), on = r.node(), m, n] {
      if (on->grad.empty()) return;
      MutMap(an->grad_buffer().data(), m, n) += ConstMap(on->grad.data(), n, m).transpose();
    });
  }
  return r;
}

Tensor relu(const Tensor& x) {
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, "sigmoid", stable_sigmoid, [](double, double s) { return s * (1.0 - s); });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, "tanh", [](double v) { return std::tanh(v); },
      [](double, double t) { return 1.0 - t * t; });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, "exp", [](double v) { return std::exp(v); }, [](double, double e) { return e; });
}

Tensor log(const Tensor& x) {
  for (double v : x.values()) {
    if (!(v > 0.0)) throw DomainError("log: non-positive argument " + std::to_string(v));
  }
  return unary(
      x, "log", [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor square(const Tensor& x) {
  return unary(
      x, "square", [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ContractViolation("concat: no inputs");
  const Shape& first = parts[0].shape();
  require_axis(parts[0], axis, "concat");
  Shape shape = first;
  shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) {
      throw ContractViolation("concat: incompatible shapes " + to_string(first) + " and " +
                              to_string(s));
    }
    shape[axis] += s[axis];
  }
  const AxisSplit outer_split = split_at(shape, axis);
  std::vector<double> out(numel(shape));
  std::vector<std::size_t> blocks;
  std::size_t row = 0;
  for (const auto& p : parts) row += p.dim(axis) * outer_split.inner;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t block = p.dim(axis) * outer_split.inner;
    auto v = p.values();
    for (std::size_t o = 0; o < outer_split.outer; ++o) {
      std::copy_n(v.begin() + o * block, block, out.begin() + o * row + offset);
    }
    blocks.push_back(block);
    offset += block;
  }
  bool track = false;
  if (active_tape()) {
    track = std::any_of(parts.begin(), parts.end(), [](const Tensor& t) { return t.requires_grad(); });
  }
  Tensor r = result(std::move(shape), std::move(out), track, "concat");
  if (track) {
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    record([nodes = std::move(nodes), blocks = std::move(blocks), on = r.node(),
            outer = outer_split.outer, row] {
      if (on->grad.empty()) return;
      std::size_t offset = 0;
      for (std::size_t p = 0; p < nodes.size(); ++p) {
        if (nodes[p]->requires_grad) {
          auto& gp = nodes[p]->grad_buffer();
          for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < blocks[p]; ++i) {
              gp[o * blocks[p] + i] += on->grad[o * row + offset + i];
            }
          }
        }
        offset += blocks[p];
      }
    });
  }
  return r;
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  require_axis(x, axis, "slice");
  if (length == 0 || start + length > x.dim(axis)) {
    throw ContractViolation("slice: range [" + std::to_string(start) + ", " +
                            std::to_string(start + length) + ") outside axis " +
                            std::to_string(axis) + " of shape " + to_string(x.shape()));
  }
  const AxisSplit s = split_at(x.shape(), axis);
  Shape shape = x.shape();
  shape[axis] = length;
  std::vector<double> out(numel(shape));
  auto v = x.values();
  const std::size_t src_row = s.length * s.inner, dst_row = length * s.inner;
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(v.begin() + o * src_row + start * s.inner, dst_row, out.begin() + o * dst_row);
  }
  const bool track = tracking({&x});
  Tensor r = result(std::move(shape), std::move(out), track, "slice");
  if (track) {
    record([xn = x.node(), on = r.node(), s, start, src_row, dst_row] {
      if (on->grad.empty()) return;
      auto& gx = xn->grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < dst_row; ++i) {
          gx[o * src_row + start * s.inner + i] += on->grad[o * dst_row + i];
        }
      }
    });
  }
  return r;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw ContractViolation("reshape: cannot view " + to_string(x.shape()) + " as " +
                            to_string(shape));
  }
  auto v = x.values();
  const bool track = tracking({&x});
  Tensor r = result(std::move(shape), std::vector<double>(v.begin(), v.end()), track, "reshape");
  if (track) {
    record([xn = x.node(), on = r.node()] {
      if (on->grad.empty()) return;
      auto& gx = xn->grad_buffer();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += on->grad[i];
    });
  }
  return r;
}

Tensor sum(const Tensor& x, std::size_t axis) {
  require_axis(x, axis, "sum");
  const AxisSplit s = split_at(x.shape(), axis);
  Shape shape = x.shape();
  shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
  std::vector<double> out(s.outer * s.inner, 0.0);
  auto v = x.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t k = 0; k < s.length; ++k) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        out[o * s.inner + i] += v[(o * s.length + k) * s.inner + i];
      }
    }
  }
  const bool track = tracking({&x});
  Tensor r = result(std::move(shape), std::move(out), track, "sum");
  if (track) {
    record([xn = x.node(), on = r.node(), s] {
      if (on->grad.empty()) return;
      auto& gx = xn->grad_buffer();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t k = 0; k < s.length; ++k) {
          for (std::size_t i = 0; i < s.inner; ++i) {
            gx[(o * s.length + k) * s.inner + i] += on->grad[o * s.inner + i];
          }
        }
      }
    });
  }
  return r;
}

Tensor mean(const Tensor& x, std::size_t axis) {
  require_axis(x, axis, "mean");
  return scale(sum(x, axis), 1.0 / static_cast<double>(x.dim(axis)));
}

Tensor sum_all(const Tensor& x) { return sum(reshape(x, {x.size()}), 0); }

Tensor mean_all(const Tensor& x) {
  return scale(sum_all(x), 1.0 / static_cast<double>(x.size()));
}

Tensor softmax(const Tensor& x) {
  if (x.rank() == 0) throw ContractViolation("softmax: scalar input");
  const std::size_t width = x.shape().back(), rows = x.size() / width;
  auto v = x.values();
  std::vector<double> out(v.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = v.data() + r * width;
    double* y = out.data() + r * width;
    const double m = *std::max_element(in, in + width);
    double total = 0.0;
    for (std::size_t j = 0; j < width; ++j) total += (y[j] = std::exp(in[j] - m));
    for (std::size_t j = 0; j < width; ++j) y[j] /= total;
  }
  const bool track = tracking({&x});
  Tensor r = result(x.shape(), std::move(out), track, "softmax");
  if (track) {
    record([xn = x.node(), on = r.node(), rows, width] {
      if (on->grad.empty()) return;
      auto& gx = xn->grad_buffer();
      const auto& y = on->value;
      const auto& g = on->grad;
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t base = r * width;
        double dot = 0.0;
        for (std::size_t j = 0; j < width; ++j) dot += g[base + j] * y[base + j];
        for (std::size_t j = 0; j < width; ++j) gx[base + j] += y[base + j] * (g[base + j] - dot);
      }
    });
  }
  return r;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (x.rank() == 0) throw ContractViolation("layer_norm: scalar input");
  const std::size_t width = x.shape().back(), rows = x.size() / width;
  if (gamma.shape() != Shape{width} || beta.shape() != Shape{width}) {
    throw ContractViolation("layer_norm: scale/shift shapes " + to_string(gamma.shape()) + ", " +
                            to_string(beta.shape()) + " do not match input " +
                            to_string(x.shape()));
  }
  auto v = x.values();
  auto gv = gamma.values();
  auto bv = beta.values();
  std::vector<double> out(v.size()), xhat(v.size()), rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * width;
    double mu = 0.0;
    for (std::size_t j = 0; j < width; ++j) mu += v[base + j];
    mu /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t j = 0; j < width; ++j) var += (v[base + j] - mu) * (v[base + j] - mu);
    var /= static_cast<double>(width);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < width; ++j) {
      xhat[base + j] = (v[base + j] - mu) * rstd[r];
      out[base + j] = xhat[base + j] * gv[j] + bv[j];
    }
  }
  const bool track = tracking({&x, &gamma, &beta});
  Tensor r = result(x.shape(), std::move(out), track, "layer_norm");
  if (track) {
    record([xn = x.node(), gn = gamma.node(), bn = beta.node(), on = r.node(),
            xhat = std::move(xhat), rstd = std::move(rstd), rows, width] {
      if (on->grad.empty()) return;
      const auto& g = on->grad;
      if (gn->requires_grad) {
        auto& gg = gn->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gg[i % width] += g[i] * xhat[i];
      }
      if (bn->requires_grad) {
        auto& gb = bn->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i % width] += g[i];
      }
      if (xn->requires_grad) {
        auto& gx = xn->grad_buffer();
        const auto& gamma_v = gn->value;
        const double inv_w = 1.0 / static_cast<double>(width);
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t base = r * width;
          double mean_d = 0.0, mean_dx = 0.0;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = g[base + j] * gamma_v[j];
            mean_d += d;
            mean_dx += d * xhat[base + j];
          }
          mean_d *= inv_w;
          mean_dx *= inv_w;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = g[base + j] * gamma_v[j];
            gx[base + j] += rstd[r] * (d - mean_d - xhat[base + j] * mean_dx);
          }
        }
      }
    });
  }
  return r;
}

Tensor dropout(const Tensor& x, double p, bool train, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ContractViolation("dropout: rate must lie in [0, 1), got " + std::to_string(p));
  }
  if (!train || p == 0.0) return x;
  const double keep = 1.0 / (1.0 - p);
  auto v = x.values();
  std::vector<double> mask(v.size()), out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    mask[i] = rng.uniform() >= p ? keep : 0.0;
    out[i] = v[i] * mask[i];
  }
  const bool track = tracking({&x});
  Tensor r = result(x.shape(), std::move(out), track, "dropout");
  if (track) {
    record([xn = x.node(), on = r.node(), mask = std::move(mask)] {
      if (on->grad.empty()) return;
      auto& gx = xn->grad_buffer();
      for (std::size_t i = 0; i < mask.size(); ++i) gx[i] += on->grad[i] * mask[i];
    });
  }
  return r;
}

Tensor cross_entropy(const Tensor& logits, std::size_t label) {
  require_rank(logits, 1, "cross_entropy");
  const std::size_t classes = logits.size();
  if (label >= classes) {
    throw ContractViolation("cross_entropy: label " + std::to_string(label) + " outside [0, " +
                            std::to_string(classes) + ")");
  }
  auto v = logits.values();
  const double m = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double z : v) total += std::exp(z - m);
  const double lse = m + std::log(total);
  const bool track = tracking({&logits});
  Tensor r = result({}, {lse - v[label]}, track, "cross_entropy");
  if (track) {
    record([ln = logits.node(), on = r.node(), label, lse] {
      if (on->grad.empty()) return;
      auto& gl = ln->grad_buffer();
      const double g = on->grad[0];
      for (std::size_t c = 0; c < gl.size(); ++c) {
        gl[c] += g * (std::exp(ln->value[c] - lse) - (c == label ? 1.0 : 0.0));
      }
    });
  }
  return r;
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  require_rank(x, 2, "gather_rows");
  if (rows.empty()) throw ContractViolation("gather_rows: empty index list");
  const std::size_t n = x.dim(0), k = x.dim(1);
  auto v = x.values();
  std::vector<double> out(rows.size() * k);
  for (std::size_t e = 0; e < rows.size(); ++e) {
    if (rows[e] >= n) {
      throw ContractViolation("gather_rows: row " + std::to_string(rows[e]) + " outside shape " +
                              to_string(x.shape()));
    }
    std::copy_n(v.begin() + rows[e] * k, k, out.begin() + e * k);
  }
  const bool track = tracking({&x});
  Tensor r = result({rows.size(), k}, std::move(out), track, "gather_rows");
  if (track) {
    record([xn = x.node(), on = r.node(), idx = std::vector<std::size_t>(rows.begin(), rows.end()),
            k] {
      if (on->grad.empty()) return;
      auto& gx = xn->grad_buffer();
      for (std::size_t e = 0; e < idx.size(); ++e) {
        for (std::size_t j = 0; j < k; ++j) gx[idx[e] * k + j] += on->grad[e * k + j];
      }
    });
  }
  return r;
}

Tensor scatter_matrix(const Tensor& values, std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols, std::size_t n_rows, std::size_t n_cols) {
  if (rows.size() != values.size() || cols.size() != values.size()) {
    throw ContractViolation("scatter_matrix: " + std::to_string(values.size()) + " values for " +
                            std::to_string(rows.size()) + " rows and " +
                            std::to_string(cols.size()) + " cols");
  }
  std::vector<double> out(n_rows * n_cols, 0.0);
  auto v = values.values();
  std::vector<std::size_t> flat(v.size());
  for (std::size_t e = 0; e < v.size(); ++e) {
    if (rows[e] >= n_rows || cols[e] >= n_cols) {
      throw ContractViolation("scatter_matrix: index (" + std::to_string(rows[e]) + ", " +
                              std::to_string(cols[e]) + ") outside " + std::to_string(n_rows) +
                              "x" + std::to_string(n_cols));
    }
    flat[e] = rows[e] * n_cols + cols[e];
    out[flat[e]] += v[e];
  }
  const bool track = tracking({&values});
  Tensor r = result({n_rows, n_cols}, std::move(out), track, "scatter_matrix");
  if (track) {
    record([vn = values.node(), on = r.node(), flat = std::move(flat)] {
      if (on->grad.empty()) return;
      auto& gv = vn->grad_buffer();
      for (std::size_t e = 0; e < flat.size(); ++e) gv[e] += on->grad[flat[e]];
    });
  }
  return r;
}

Tensor diagonal(const Tensor& square_matrix) {
  require_rank(square_matrix, 2, "diagonal");
  const std::size_t n = square_matrix.dim(0);
  if (square_matrix.dim(1) != n) {
    throw ContractViolation("diagonal: non-square shape " + to_string(square_matrix.shape()));
  }
  auto v = square_matrix.values();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i * n + i];
  const bool track = tracking({&square_matrix});
  Tensor r = result({n}, std::move(out), track, "diagonal");
  if (track) {
    record([xn = square_matrix.node(), on = r.node(), n] {
      if (on->grad.empty()) return;
      auto& gx = xn->grad_buffer();
      for (std::size_t i = 0; i < n; ++i) gx[i * n + i] += on->grad[i];
    });
  }
  return r;
}

Tensor diag_embed(const Tensor& vector) {
  require_rank(vector, 1, "diag_embed");
  const std::size_t n = vector.size();
  auto v = vector.values();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i * n + i] = v[i];
  const bool track = tracking({&vector});
  Tensor r = result({n, n}, std::move(out), track, "diag_embed");
  if (track) {
    record([vn = vector.node(), on = r.node(), n] {
      if (on->grad.empty()) return;
      auto& gv = vn->grad_buffer();
      for (std::size_t i = 0; i < n; ++i) gv[i] += on->grad[i * n + i];
    });
  }
  return r;
}

Tensor expand_rows(const Tensor& vector, std::size_t n) {
  require_rank(vector, 1, "expand_rows");
  if (n == 0) throw ContractViolation("expand_rows: zero rows");
  const std::size_t k = vector.size();
  auto v = vector.values();
  std::vector<double> out(n * k);
  for (std::size_t i = 0; i < n; ++i) std::copy(v.begin(), v.end(), out.begin() + i * k);
  const bool track = tracking({&vector});
  Tensor r = result({n, k}, std::move(out), track, "expand_rows");
  if (track) {
    record([vn = vector.node(), on = r.node(), n, k] {
      if (on->grad.empty()) return;
      auto& gv = vn->grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) gv[j] += on->grad[i * k + j];
      }
    });
  }
  return r;
}

void check_finite(const Tensor& x, std::string_view stage) {
  for (double v : x.values()) {
    if (!std::isfinite(v)) {
      throw NumericError("non-finite value in " + std::string(stage) + " (shape " +
                         to_string(x.shape()) + ")");
    }
  }
}

}  // namespace ctqw
