// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ctqw/errors.hpp"
#include "ctqw/ops.hpp"
#include "fd_helpers.hpp"

namespace ctqw {
namespace {

using testing::expect_gradients;
using testing::random_parameter;
using testing::random_tensor;
using Inputs = std::vector<Tensor>;

TEST(Tensor, RejectsZeroDimensionsAndBadCounts) {
  EXPECT_THROW(Tensor(Shape{0, 3}), ContractViolation);
  EXPECT_THROW(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), ContractViolation);
  EXPECT_THROW(Tensor().shape(), ContractViolation);
  EXPECT_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_EQ(Tensor::scalar(1).rank(), 0u);
}

TEST(Tensor, IdentityAndIndexing) {
  const Tensor i3 = Tensor::identity(3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(i3(r, c), r == c ? 1.0 : 0.0);
  const Tensor t({2, 2, 2}, std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7});
  EXPECT_EQ(t(1, 0, 1), 5.0);
}

TEST(Tape, BackwardTwiceThrows) {
  Tensor x = Tensor::parameter({2}, {1.0, 2.0});
  Tape tape;
  TapeScope scope(tape);
  const Tensor l = sum_all(square(x));
  tape.backward(l);
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(tape.backward(l), ContractViolation);
  EXPECT_DOUBLE_EQ(x.grad()[0], 2.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], 4.0);
}

TEST(Tape, NonScalarLossThrows) {
  Tensor x = Tensor::parameter({2}, {1.0, 2.0});
  Tape tape;
  TapeScope scope(tape);
  const Tensor y = square(x);
  EXPECT_THROW(tape.backward(y), ContractViolation);
}

TEST(Tape, NothingRecordedWithoutActiveTapeOrGradients) {
  Tensor x = Tensor::parameter({2}, {1.0, 2.0});
  const Tensor y = square(x);  // no tape
  Tape tape;
  TapeScope scope(tape);
  const Tensor c({2}, 3.0);
  const Tensor z = c * c;
  EXPECT_EQ(tape.size(), 0u);
  (void)y;
  (void)z;
}

TEST(Tape, GradientsAccumulateAcrossUses) {
  Tensor x = Tensor::parameter({}, {3.0});
  Tape tape;
  TapeScope scope(tape);
  const Tensor l = x * x + x;  // 2x + 1
  tape.backward(l);
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);
}

TEST(Ops, MatmulMatchesNaiveLoop) {
  Rng rng{1};
  const Tensor a = random_tensor({4, 3}, rng), b = random_tensor({3, 5}, rng);
  const Tensor c = matmul(a, b);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), s, 1e-14);
    }
  }
  EXPECT_THROW(matmul(a, a), ContractViolation);
}

TEST(Ops, BroadcastSuffixAndScalar) {
  const Tensor m({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  const Tensor row({3}, std::vector<double>{10, 20, 30});
  const Tensor s = add(m, row);
  EXPECT_EQ(s(1, 2), 36.0);
  const Tensor t = mul(m, Tensor::scalar(2.0));
  EXPECT_EQ(t(1, 0), 8.0);
  EXPECT_THROW(add(m, Tensor({2}, 1.0)), ContractViolation);
}

TEST(Ops, DomainErrors) {
  EXPECT_THROW(div(Tensor({2}, 1.0), Tensor({2}, std::vector<double>{1.0, 0.0})), DomainError);
  EXPECT_THROW(ctqw::log(Tensor({1}, 0.0)), DomainError);
  EXPECT_THROW(ctqw::log(Tensor({1}, -1.0)), DomainError);
}

TEST(Ops, SigmoidStableAtExtremes) {
  const Tensor s = sigmoid(Tensor({3}, std::vector<double>{-800.0, 0.0, 800.0}));
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 0.5);
  EXPECT_EQ(s[2], 1.0);
  for (double v : s.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Ops, SoftmaxRowsSumToOneAndShiftInvariant) {
  Rng rng{2};
  const Tensor x = random_tensor({5, 7}, rng, -30.0, 30.0);
  const Tensor p = softmax(x);
  const Tensor q = softmax(x + Tensor::scalar(123.0));
  for (std::size_t i = 0; i < 5; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 7; ++j) {
      row += p(i, j);
      EXPECT_NEAR(p(i, j), q(i, j), 1e-14);
    }
    EXPECT_NEAR(row, 1.0, 1e-14);
  }
}

TEST(Ops, LayerNormMoments) {
  Rng rng{3};
  const Tensor x = random_tensor({4, 16}, rng, -5.0, 5.0);
  const Tensor y = layer_norm(x, Tensor({16}, 1.0), Tensor({16}, 0.0));
  for (std::size_t i = 0; i < 4; ++i) {
    double m = 0.0, v = 0.0;
    for (std::size_t j = 0; j < 16; ++j) m += y(i, j);
    m /= 16;
    for (std::size_t j = 0; j < 16; ++j) v += (y(i, j) - m) * (y(i, j) - m);
    v /= 16;
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v, 1.0, 1e-6);
  }
}

TEST(Ops, CrossEntropyKnownValues) {
  EXPECT_NEAR(cross_entropy(Tensor({2}, 0.0), 0).item(), std::log(2.0), 1e-15);
  const Tensor logits({3}, std::vector<double>{1.0, 2.0, 3.0});
  const double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
  EXPECT_NEAR(cross_entropy(logits, 2).item(), lse - 3.0, 1e-14);
  EXPECT_NEAR(cross_entropy(Tensor({2}, std::vector<double>{1000.0, 0.0}), 1).item(), 1000.0, 1e-9);
  EXPECT_THROW(cross_entropy(logits, 3), ContractViolation);
}

TEST(Ops, DropoutIdentityInEvalAndScaledInTrain) {
  Rng rng{4};
  const Tensor x({1000}, 1.0);
  const Tensor e = dropout(x, 0.3, false, rng);
  for (double v : e.values()) EXPECT_EQ(v, 1.0);
  Rng r1{5}, r2{5};
  const Tensor a = dropout(x, 0.3, true, r1);
  const Tensor b = dropout(x, 0.3, true, r2);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(a[i], b[i]);
    if (a[i] == 0.0) ++zeros;
    else EXPECT_NEAR(a[i], 1.0 / 0.7, 1e-15);
  }
  EXPECT_GT(zeros, 230u);
  EXPECT_LT(zeros, 370u);
  EXPECT_THROW(dropout(x, 1.0, true, rng), ContractViolation);
  EXPECT_THROW(dropout(x, -0.1, true, rng), ContractViolation);
}

TEST(Ops, ShapeHelpers) {
  const Tensor m({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(transpose(m)(2, 1), 6.0);
  EXPECT_EQ(sum(m, 0)[2], 9.0);
  EXPECT_EQ(sum(m, 1)[1], 15.0);
  EXPECT_EQ(mean(m, 0)[0], 2.5);
  EXPECT_EQ(sum_all(m).item(), 21.0);
  EXPECT_EQ(concat({m, m}, 1)(1, 4), 5.0);
  EXPECT_EQ(concat({m, m}, 0)(3, 0), 4.0);
  EXPECT_EQ(slice(m, 1, 1, 2)(1, 0), 5.0);
  EXPECT_EQ(reshape(m, {3, 2})(2, 1), 6.0);
  EXPECT_EQ(diagonal(Tensor::identity(3))[2], 1.0);
  EXPECT_EQ(diag_embed(Tensor({2}, 4.0))(1, 1), 4.0);
  EXPECT_EQ(expand_rows(Tensor({3}, std::vector<double>{7, 8, 9}), 4)(3, 2), 9.0);
  const std::vector<std::size_t> rows{1, 1, 0};
  EXPECT_EQ(gather_rows(m, rows)(1, 0), 4.0);
  const std::vector<std::size_t> r{0, 1}, c{1, 0};
  const Tensor s = scatter_matrix(Tensor({2}, std::vector<double>{3, 5}), r, c, 2, 2);
  EXPECT_EQ(s(0, 1), 3.0);
  EXPECT_EQ(s(1, 0), 5.0);
  EXPECT_EQ(s(0, 0), 0.0);
  EXPECT_THROW(slice(m, 1, 2, 2), ContractViolation);
  EXPECT_THROW(reshape(m, {4}), ContractViolation);
}

TEST(Ops, CheckFiniteNamesStage) {
  const Tensor bad({2}, std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()});
  try {
    check_finite(bad, "unit stage");
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("unit stage"), std::string::npos);
  }
}

// Reverse-mode versus central differences for every primitive.
class OpGradient : public ::testing::Test {
 protected:
  Rng rng{42};
};

TEST_F(OpGradient, Elementwise) {
  expect_gradients({random_parameter({3, 4}, rng), random_parameter({3, 4}, rng)},
                   [](const Inputs& in) { return in[0] + in[1]; });
  expect_gradients({random_parameter({3, 4}, rng), random_parameter({4}, rng)},
                   [](const Inputs& in) { return in[0] - in[1]; });
  expect_gradients({random_parameter({3, 4}, rng), random_parameter({3, 4}, rng)},
                   [](const Inputs& in) { return in[0] * in[1]; });
  expect_gradients({random_parameter({3, 4}, rng), random_parameter({4}, rng, 1.0, 2.0)},
                   [](const Inputs& in) { return in[0] / in[1]; });
  expect_gradients({random_parameter({2, 3}, rng), random_parameter({}, rng, 1.0, 2.0)},
                   [](const Inputs& in) { return in[0] / in[1]; });
  expect_gradients({random_parameter({3, 4}, rng)}, [](const Inputs& in) { return 2.5 * in[0]; });
}

TEST_F(OpGradient, Unary) {
  // Keep relu inputs away from the kink.
  Tensor x = random_parameter({20}, rng, 0.1, 1.0);
  for (std::size_t i = 0; i < 20; i += 2) x.mutable_values()[i] *= -1.0;
  expect_gradients({x}, [](const Inputs& in) { return relu(in[0]); });
  expect_gradients({random_parameter({20}, rng, -4, 4)}, [](const Inputs& in) { return sigmoid(in[0]); });
  expect_gradients({random_parameter({20}, rng, -3, 3)}, [](const Inputs& in) { return ctqw::tanh(in[0]); });
  expect_gradients({random_parameter({20}, rng, -2, 2)}, [](const Inputs& in) { return ctqw::exp(in[0]); });
  expect_gradients({random_parameter({20}, rng, 0.2, 3)}, [](const Inputs& in) { return ctqw::log(in[0]); });
  expect_gradients({random_parameter({20}, rng)}, [](const Inputs& in) { return square(in[0]); });
}

TEST_F(OpGradient, LinearAlgebraAndShapes) {
  expect_gradients({random_parameter({3, 4}, rng), random_parameter({4, 2}, rng)},
                   [](const Inputs& in) { return matmul(in[0], in[1]); });
  expect_gradients({random_parameter({3, 4}, rng)}, [](const Inputs& in) { return transpose(in[0]); });
  expect_gradients({random_parameter({2, 3}, rng), random_parameter({2, 2}, rng)},
                   [](const Inputs& in) { return concat({in[0], in[1]}, 1); });
  expect_gradients({random_parameter({2, 3}, rng), random_parameter({1, 3}, rng)},
                   [](const Inputs& in) { return concat({in[0], in[1]}, 0); });
  expect_gradients({random_parameter({3, 5}, rng)}, [](const Inputs& in) { return slice(in[0], 1, 1, 3); });
  expect_gradients({random_parameter({3, 4}, rng)}, [](const Inputs& in) { return reshape(in[0], {4, 3}); });
  expect_gradients({random_parameter({3, 4}, rng)}, [](const Inputs& in) { return sum(in[0], 0); });
  expect_gradients({random_parameter({3, 4}, rng)}, [](const Inputs& in) { return mean(in[0], 1); });
  expect_gradients({random_parameter({3, 4}, rng)}, [](const Inputs& in) { return mean_all(in[0]); });
}

TEST_F(OpGradient, NormalisationAndLoss) {
  expect_gradients({random_parameter({3, 5}, rng, -3, 3)}, [](const Inputs& in) { return softmax(in[0]); });
  expect_gradients({random_parameter({3, 6}, rng), random_parameter({6}, rng), random_parameter({6}, rng)},
                   [](const Inputs& in) { return layer_norm(in[0], in[1], in[2]); });
  expect_gradients({random_parameter({4}, rng, -2, 2)},
                   [](const Inputs& in) { return cross_entropy(in[0], 2); });
  expect_gradients({random_parameter({50}, rng)}, [](const Inputs& in) {
    Rng mask{7};
    return dropout(in[0], 0.4, true, mask);
  });
}

TEST_F(OpGradient, GraphHelpers) {
  const std::vector<std::size_t> rows{2, 0, 2};
  expect_gradients({random_parameter({3, 4}, rng)},
                   [&](const Inputs& in) { return gather_rows(in[0], rows); });
  const std::vector<std::size_t> r{0, 1, 2, 0}, c{1, 0, 2, 1};
  expect_gradients({random_parameter({4}, rng)},
                   [&](const Inputs& in) { return scatter_matrix(in[0], r, c, 3, 3); });
  expect_gradients({random_parameter({4, 4}, rng)}, [](const Inputs& in) { return diagonal(in[0]); });
  expect_gradients({random_parameter({4}, rng)}, [](const Inputs& in) { return diag_embed(in[0]); });
  expect_gradients({random_parameter({4}, rng)}, [](const Inputs& in) { return expand_rows(in[0], 3); });
}

}  // namespace
}  // namespace ctqw
