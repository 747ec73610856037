// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include <gtest/gtest.h>

#include <cmath>

#include "ctqw/errors.hpp"
#include "ctqw/qwe.hpp"
#include "ctqw/qwgr.hpp"
#include "ctqw/qwgt.hpp"
#include "ctqw/synthetic.hpp"
#include "fd_helpers.hpp"

namespace ctqw {
namespace {

using testing::random_tensor;

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& perm) {
  // Row i moves to perm[i].
  std::vector<std::size_t> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = i;
  return gather_rows(x, inverse);
}

Tensor permute_matrix(const Tensor& m, const std::vector<std::size_t>& perm) {
  return transpose(permute_rows(transpose(permute_rows(m, perm)), perm));
}

class Transformer : public ::testing::Test {
 protected:
  Rng rng{31};
  qwgt::QWGTParams params = qwgt::init_params(8, 4, rng);
  ForwardContext eval;
};

TEST_F(Transformer, RejectsIndivisibleHeads) { EXPECT_THROW(qwgt::init_params(10, 4, rng), ConfigError); }

TEST_F(Transformer, ConstantBiasLeavesOutputUnchanged) {
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.next() % 9;
    const Tensor x = random_tensor({n, 8}, rng, -2, 2);
    const Tensor zero = qwgt::layer(x, Tensor({n, n}, 0.0), params, eval);
    const Tensor shifted = qwgt::layer(x, Tensor({n, n}, rng.uniform(-5, 5)), params, eval);
    EXPECT_LE(max_abs_diff(zero, shifted), 1e-12);
  }
}

TEST_F(Transformer, SingleNodeAttendsToItself) {
  const Tensor x = random_tensor({1, 8}, rng);
  qwgt::AttentionTrace trace;
  const Tensor y = qwgt::layer(x, Tensor({1, 1}, 0.3), params, eval, &trace);
  EXPECT_EQ(y.shape(), (Shape{1, 8}));
  ASSERT_EQ(trace.heads.size(), 4u);
  for (const auto& a : trace.heads) EXPECT_DOUBLE_EQ(a.item(), 1.0);
}

TEST_F(Transformer, AttentionRowsAreDistributions) {
  const Tensor x = random_tensor({6, 8}, rng);
  qwgt::AttentionTrace trace;
  qwgt::layer(x, random_tensor({6, 6}, rng), params, eval, &trace);
  for (const auto& a : trace.heads) {
    const Tensor rows = sum(a, 1);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(rows[i], 1.0, 1e-14);
  }
}

TEST_F(Transformer, PermutationEquivariant) {
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng.next() % 8;
    const Tensor x = random_tensor({n, 8}, rng);
    const Tensor b = random_tensor({n, n}, rng);
    const auto perm = random_permutation(n, rng);
    const Tensor y = qwgt::layer(x, b, params, eval);
    const Tensor py = qwgt::layer(permute_rows(x, perm), permute_matrix(b, perm), params, eval);
    EXPECT_LE(max_abs_diff(permute_rows(y, perm), py), 1e-12);
  }
}

TEST_F(Transformer, StructuralBiasFromProbabilities) {
  Graph g = random_graph(5, 0.4, 1, rng);
  const Tensor p = qwe::probabilities_at(qwe::unit_hamiltonian(g), 2.0);
  const Tensor b = qwgt::structural_bias(p);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(b(i, j), std::log1p(p(i, j)), 1e-12);
  const Tensor unnormalised = scale(p, 3.0);
  EXPECT_LE(max_abs_diff(qwgt::structural_bias(unnormalised), b), 1e-14);
  EXPECT_THROW(qwgt::structural_bias(Tensor({2, 2}, 0.0)), ContractViolation);
}

TEST_F(Transformer, GradientsMatchFiniteDifferences) {
  ParameterSet set;
  params.register_into(set, "qwgt");
  const Tensor x = random_tensor({4, 8}, rng);
  const Tensor b = random_tensor({4, 4}, rng, 0, 0.7);
  const auto report = check_gradients(set, [&] {
    Rng mask{77};
    const ForwardContext ctx{true, 0.3, &mask};
    return testing::weighted_sum(qwgt::layer(x, b, params, ctx));
  }, {1e-5, 1e-5, 1e-6, 5});
  EXPECT_EQ(report.passed, report.coordinates) << testing::describe(report);
}

TEST_F(Transformer, DropoutNeedsRng) {
  const ForwardContext train{true, 0.3, nullptr};
  EXPECT_THROW(qwgt::layer(random_tensor({3, 8}, rng), Tensor(), params, train), ContractViolation);
}

class Recurrent : public ::testing::Test {
 protected:
  Rng rng{41};
};

TEST_F(Recurrent, ZeroWeightCellHalvesState) {
  qwgr::GRUCellParams cell = qwgr::init_cell(1, 3, rng);
  for (Tensor* t : {&cell.w_input, &cell.b_input, &cell.u_gates, &cell.u_candidate}) {
    for (double& v : t->mutable_values()) v = 0.0;
  }
  const Tensor h = random_tensor({2, 3}, rng);
  const Tensor out = qwgr::gru_cell(random_tensor({2, 1}, rng), h, cell);
  EXPECT_LE(max_abs_diff(out, scale(h, 0.5)), 1e-15);
}

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

TEST_F(Recurrent, MatchesHandUnrolledCell) {
  const qwgr::GRUCellParams c = qwgr::init_cell(1, 2, rng);
  double h[2] = {0.0, 0.0};
  const double xs[3] = {0.3, -0.8, 0.5};
  Tensor state({1, 2}, 0.0);
  for (double x : xs) {
    double z[2], r[2], cand[2];
    // Column blocks of the fused weights: update [0, 2), reset [2, 4), candidate [4, 6).
    for (int k = 0; k < 2; ++k) {
      z[k] = sig(x * c.w_input[k] + h[0] * c.u_gates(0, k) + h[1] * c.u_gates(1, k) + c.b_input[k]);
      r[k] = sig(x * c.w_input[2 + k] + h[0] * c.u_gates(0, 2 + k) + h[1] * c.u_gates(1, 2 + k) +
                 c.b_input[2 + k]);
    }
    for (int k = 0; k < 2; ++k) {
      cand[k] = std::tanh(x * c.w_input[4 + k] + r[0] * h[0] * c.u_candidate(0, k) +
                          r[1] * h[1] * c.u_candidate(1, k) + c.b_input[4 + k]);
    }
    for (int k = 0; k < 2; ++k) h[k] = (1.0 - z[k]) * h[k] + z[k] * cand[k];
    state = qwgr::gru_cell(Tensor({1, 1}, x), state, c);
    EXPECT_NEAR(state[0], h[0], 1e-14);
    EXPECT_NEAR(state[1], h[1], 1e-14);
  }
}

TEST_F(Recurrent, StatesStayInsideUnitInterval) {
  const qwgr::QWGRParams p = qwgr::init_params(4, 8, rng);
  const Tensor series = random_tensor({5, 6}, rng, -20, 20);
  const Tensor states = qwgr::encode_temporal(series, p);
  EXPECT_EQ(states.shape(), (Shape{5, 8}));
  for (double v : states.values()) EXPECT_LT(std::abs(v), 1.0);
}

TEST_F(Recurrent, TimeReversalSwapsDirections) {
  qwgr::QWGRParams p = qwgr::init_params(3, 6, rng);
  const Tensor series = random_tensor({4, 5}, rng, 0, 1);
  std::vector<Tensor> cols;
  for (std::size_t t = 5; t-- > 0;) cols.push_back(slice(series, 1, t, 1));
  const Tensor reversed = concat(cols, 1);
  qwgr::QWGRParams swapped = p;
  std::swap(swapped.forward, swapped.backward);
  const Tensor a = qwgr::encode_temporal(series, p);
  const Tensor b = qwgr::encode_temporal(reversed, swapped);
  EXPECT_LE(max_abs_diff(slice(a, 1, 0, 3), slice(b, 1, 3, 3)), 1e-15);
  EXPECT_LE(max_abs_diff(slice(a, 1, 3, 3), slice(b, 1, 0, 3)), 1e-15);
}

TEST_F(Recurrent, RowsAreIndependent) {
  const qwgr::QWGRParams p = qwgr::init_params(3, 6, rng);
  const Tensor series = random_tensor({4, 3}, rng, 0, 1);
  const Tensor all = qwgr::encode_temporal(series, p);
  const Tensor one = qwgr::encode_temporal(slice(series, 0, 2, 1), p);
  EXPECT_LE(max_abs_diff(slice(all, 0, 2, 1), one), 1e-15);
}

TEST_F(Recurrent, ReadoutIgnoresNodeOrder) {
  const qwgr::QWGRParams p = qwgr::init_params(3, 6, rng);
  const Tensor states = random_tensor({5, 6}, rng);
  const auto perm = random_permutation(5, rng);
  const Tensor a = qwgr::graph_readout(states, p);
  EXPECT_EQ(a.shape(), (Shape{6}));
  EXPECT_LE(max_abs_diff(a, qwgr::graph_readout(permute_rows(states, perm), p)), 1e-14);
  // Duplicating every node leaves the mean, and hence the readout, unchanged.
  EXPECT_LE(max_abs_diff(a, qwgr::graph_readout(concat({states, states}, 0), p)), 1e-14);
}

TEST_F(Recurrent, DiagonalSeries) {
  Graph g = random_graph(4, 0.5, 1, rng);
  const auto ev = qwe::simulate_ctqw(qwe::unit_hamiltonian(g), 3);
  const Tensor d = qwgr::extract_diagonals(ev);
  EXPECT_EQ(d.shape(), (Shape{4, 3}));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(d(i, t), ev.slices[t](i, i));
}

TEST_F(Recurrent, GradientsMatchFiniteDifferences) {
  const qwgr::QWGRParams p = qwgr::init_params(3, 6, rng);
  ParameterSet set;
  p.register_into(set, "qwgr");
  const Tensor series = random_tensor({4, 4}, rng, 0, 1);
  const auto report = check_gradients(set, [&] {
    return testing::weighted_sum(qwgr::graph_readout(qwgr::encode_temporal(series, p), p));
  }, {1e-5, 1e-5, 1e-6, 5});
  EXPECT_EQ(report.passed, report.coordinates) << testing::describe(report);
}

}  // namespace
}  // namespace ctqw
