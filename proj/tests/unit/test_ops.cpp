/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fithand/error.hpp"
#include "fithand/gradcheck.hpp"
#include "fithand/ops.hpp"
#include "fithand/optim.hpp"

using namespace fithand;

namespace {

Tensor<double> row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor<double>(Shape{1, 1, 1, n}, std::move(v));
}

Tensor<double> run_lrn(const Tensor<double>& x, const LrnParams& p) {
  Tape<double> tape;
  return tape.value(lrn(tape, tape.leaf(x), p));
}

}  // namespace

TEST(Lrn, SingleActiveChannel) {
  Tensor<double> x(Shape{1, 5, 1, 1});
  x[2] = 1.0;
  const auto y = run_lrn(x, LrnParams{});
  // 1 / (2 + 1e-4 * 1)^0.75 evaluated directly.
  const double oracle = 1.0 / std::pow(2.0 + 1e-4, 0.75);
  EXPECT_NEAR(y[2], oracle, 1e-15);
  EXPECT_NEAR(y[2], 0.59459, 1e-5);
  EXPECT_EQ(y[0], 0.0);
}

TEST(Lrn, ZeroInputAndDegenerateExponents) {
  EXPECT_EQ(run_lrn(Tensor<double>(Shape{1, 4, 2, 2}), LrnParams{}).storage(), std::vector<double>(16, 0.0));

  Tensor<double> x(Shape{1, 7, 2, 1});
  std::mt19937_64 rng(4);
  for (auto& v : x.data()) v = std::uniform_real_distribution<double>(-3, 3)(rng);
  LrnParams identity;
  identity.beta = 0.0;
  EXPECT_EQ(run_lrn(x, identity).storage(), x.storage());

  LrnParams no_alpha;
  no_alpha.alpha = 0.0;
  const auto y = run_lrn(x, no_alpha);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y[i], x[i] * std::pow(2.0, -0.75)) << i;
}

TEST(Lrn, WindowClippedAtEdges) {
  Tensor<double> x(Shape{1, 3, 1, 1}, std::vector<double>{1.0, 2.0, 3.0});
  LrnParams p;
  p.alpha = 0.5;
  const auto y = run_lrn(x, p);
  // Channel 0 sees channels 0..2 with window 5.
  EXPECT_NEAR(y[0], 1.0 / std::pow(2.0 + 0.5 * 14.0, 0.75), 1e-14);
}

TEST(Lrn, NonPositiveKRejected) {
  LrnParams p;
  p.k = 0.0;
  EXPECT_THROW(run_lrn(Tensor<double>(Shape{1, 1, 1, 1}), p), ConfigError);
}

TEST(L2Normalize, Examples) {
  Tape<double> tape;
  const auto y = tape.value(l2_normalize(tape, tape.leaf(row({3.0, 4.0})), 1e-12));
  EXPECT_DOUBLE_EQ(y[0], 0.6);
  EXPECT_DOUBLE_EQ(y[1], 0.8);
  const auto z = tape.value(l2_normalize(tape, tape.leaf(row({0.0, 0.0, 0.0})), 1e-12));
  EXPECT_EQ(z.storage(), std::vector<double>(3, 0.0));
}

TEST(L2Normalize, UnitNormPerSample) {
  Tensor<double> x(Shape{3, 2, 3, 3});
  std::mt19937_64 rng(9);
  for (auto& v : x.data()) v = std::uniform_real_distribution<double>(-2, 2)(rng);
  Tape<double> tape;
  const auto y = tape.value(l2_normalize(tape, tape.leaf(x), 1e-12));
  for (std::size_t n = 0; n < 3; ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < 18; ++i) s += y.sample(n)[i] * y.sample(n)[i];
    EXPECT_NEAR(std::sqrt(s), 1.0, 1e-6);
  }
}

TEST(Dense, HandMultiply) {
  Tape<double> tape;
  const Var x = tape.leaf(row({1.0, 2.0}));
  const Var w = tape.leaf(Tensor<double>(Shape{1, 1, 2, 2}, std::vector<double>{1, 0, 0, 1}));
  const Var b = tape.leaf(row({1.0, 1.0}));
  const auto y = tape.value(dense(tape, x, w, b));
  ASSERT_EQ(y.shape(), (Shape{1, 2, 1, 1}));
  EXPECT_EQ(y[0], 2.0);
  EXPECT_EQ(y[1], 3.0);

  const auto z = tape.value(dense(tape, tape.leaf(row({0.0, 0.0})), w, tape.leaf(row({0.25, -4.0}))));
  EXPECT_EQ(z[0], 0.25);
  EXPECT_EQ(z[1], -4.0);
  EXPECT_THROW(dense(tape, tape.leaf(row({1.0, 2.0, 3.0})), w, b), ShapeError);
}

TEST(CrossEntropy, UniformAndStabilized) {
  const std::vector<int> zero{0};
  EXPECT_NEAR(cross_entropy_loss(Tensor<double>(Shape{1, 2, 1, 1}), zero).loss, std::log(2.0), 1e-15);
  const auto big = cross_entropy_loss(Tensor<double>(Shape{1, 2, 1, 1}, std::vector<double>{1000, 0}), zero);
  EXPECT_LT(big.loss, 1e-6);
  EXPECT_TRUE(big.grad.all_finite());
}

TEST(CrossEntropy, GradientRowsSumToZero) {
  Tensor<double> logits(Shape{4, 5, 1, 1});
  std::mt19937_64 rng(2);
  for (auto& v : logits.data()) v = std::uniform_real_distribution<double>(-4, 4)(rng);
  const std::vector<int> labels{0, 4, 2, 2};
  const auto lv = cross_entropy_loss(logits, labels);
  for (std::size_t n = 0; n < 4; ++n) {
    double s = 0.0;
    for (std::size_t c = 0; c < 5; ++c) s += lv.grad.sample(n)[c];
    EXPECT_NEAR(s, 0.0, 1e-6);
  }
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  Tensor<double> logits(Shape{3, 4, 1, 1});
  std::mt19937_64 rng(5);
  for (auto& v : logits.data()) v = std::uniform_real_distribution<double>(-2, 2)(rng);
  const std::vector<int> labels{1, 3, 0};
  const auto r = grad_check(
      [&](Tape<double>& t, Var x) { return loss(t, x, std::span<const int>(labels), LossKind::cross_entropy); },
      logits, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(CrossEntropy, LabelErrors) {
  const Tensor<double> logits(Shape{2, 3, 1, 1});
  EXPECT_THROW(cross_entropy_loss(logits, std::vector<int>{0, 3}), InputError);
  EXPECT_THROW(cross_entropy_loss(logits, std::vector<int>{0, -1}), InputError);
  EXPECT_THROW(cross_entropy_loss(logits, std::vector<int>{0}), ShapeError);
}

TEST(KlDivergence, EqualsCrossEntropyForOneHot) {
  const std::vector<int> one{1};
  EXPECT_NEAR(kl_divergence_loss(Tensor<double>(Shape{1, 2, 1, 1}), one).loss, std::log(2.0), 1e-15);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor<double> logits(Shape{3, 6, 1, 1});
    for (auto& v : logits.data()) v = std::uniform_real_distribution<double>(-10, 10)(rng);
    const std::vector<int> labels{trial % 6, (trial + 1) % 6, 5};
    const auto ce = cross_entropy_loss(logits, labels);
    const auto kl = kl_divergence_loss(logits, labels);
    EXPECT_NEAR(kl.loss, ce.loss, 1e-9);
    for (std::size_t i = 0; i < ce.grad.size(); ++i) EXPECT_NEAR(kl.grad[i], ce.grad[i], 1e-6);
  }
  const auto perfect = kl_divergence_loss(Tensor<double>(Shape{1, 3, 1, 1}, std::vector<double>{0, 60, 0}), one);
  EXPECT_LT(perfect.loss, 1e-20);
}

TEST(Sgd, Examples) {
  std::vector<Tensor<float>> w{Tensor<float>(Shape{1, 1, 1, 1}, 1.0f)};
  std::vector<Tensor<float>> g{Tensor<float>(Shape{1, 1, 1, 1}, 0.5f)};
  sgd_step<float>(w, g, 1e-4f);
  EXPECT_FLOAT_EQ(w[0][0], 0.99995f);

  std::vector<Tensor<double>> w2{Tensor<double>(Shape{1, 1, 1, 3}, 2.5)};
  std::vector<Tensor<double>> zero{Tensor<double>(Shape{1, 1, 1, 3})};
  std::vector<Tensor<double>> some{Tensor<double>(Shape{1, 1, 1, 3}, 7.0)};
  sgd_step<double>(w2, zero, 0.1);
  sgd_step<double>(w2, some, 0.0);
  EXPECT_EQ(w2[0].storage(), std::vector<double>(3, 2.5));

  std::vector<Tensor<double>> wrong{Tensor<double>(Shape{1, 1, 1, 2})};
  EXPECT_THROW(sgd_step<double>(w2, wrong, 0.1), ShapeError);
}

TEST(Sgd, MomentumAccumulatesVelocity) {
  Sgd<double> opt(0.1, 0.5);
  std::vector<Tensor<double>> w{Tensor<double>(Shape{1, 1, 1, 1}, 1.0)};
  std::vector<Tensor<double>> g{Tensor<double>(Shape{1, 1, 1, 1}, 1.0)};
  opt.step(w, g);
  EXPECT_DOUBLE_EQ(w[0][0], 0.9);
  opt.step(w, g);
  EXPECT_DOUBLE_EQ(w[0][0], 0.9 - 0.1 * 1.5);
}

TEST(GradCheck, ConstantFunctionHasZeroGradients) {
  const auto r = grad_check([](Tape<double>& t, Var) { return t.leaf(Tensor<double>(Shape{1, 1, 1, 1}, 3.0)); },
                            row({1.0, 2.0}), 1e-5);
  EXPECT_EQ(r.max_rel_error, 0.0);
}

TEST(GradCheck, StepBoundsAndNonFinite) {
  auto f = [](Tape<double>& t, Var x) { return sum(t, x); };
  EXPECT_THROW(grad_check(f, row({1.0}), 1e-7), ConfigError);
  EXPECT_THROW(grad_check(f, row({1.0}), 1e-2), ConfigError);
  EXPECT_THROW(grad_check(f, row({std::nan("")}), 1e-5), NumericError);
}

TEST(GradCheck, L2NormalizeThenSum) {
  const auto r = grad_check([](Tape<double>& t, Var x) { return sum(t, l2_normalize(t, x, 1e-12)); },
                            row({0.3, -1.2, 2.0, 0.7}), 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(GradCheck, SuitePasses) {
  for (const auto& r : run_gradcheck_suite(1)) {
    EXPECT_TRUE(r.passed()) << r.name << " " << r.result.max_rel_error;
  }
}
