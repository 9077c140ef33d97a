/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fithand/attention.hpp"
#include "fithand/error.hpp"
#include "fithand/gradcheck.hpp"
#include "fithand/ops.hpp"

using namespace fithand;

namespace {

Tensor<double> scalar(double v) { return Tensor<double>(Shape{1, 1, 1, 1}, v); }

ScaleTriple<double> triple(double a, double b, double c) { return {scalar(a), scalar(b), scalar(c)}; }

// Sorted closed form, computed independently of the library.
double closed_form(double a, double b, double c) {
  double s[3] = {a, b, c};
  std::sort(s, s + 3);
  return std::max(s[1], s[0] + s[2] - s[1]);
}

std::array<double, 3> tape_grad(double a, double b, double c) {
  Tape<double> tape;
  const Var x = tape.leaf(scalar(a));
  const Var y = tape.leaf(scalar(b));
  const Var z = tape.leaf(scalar(c));
  tape.backward(attention_fuse(tape, x, y, z));
  return {tape.grad(x)[0], tape.grad(y)[0], tape.grad(z)[0]};
}

}  // namespace

TEST(Midrange, Examples) {
  EXPECT_EQ(midrange(triple(1, 2, 3))[0], 2.0);
  EXPECT_EQ(midrange(triple(5.5, 5.5, 5.5))[0], 5.5);
  EXPECT_EQ(midrange(triple(-4, 0, 2))[0], -1.0);
}

TEST(Deviation, Examples) {
  const auto g = deviation(triple(1, 2, 3), scalar(2.0));
  EXPECT_EQ(g.f1[0], 1.0);
  EXPECT_EQ(g.f2[0], 0.0);
  EXPECT_EQ(g.f3[0], 1.0);
  const auto h = deviation(triple(1, 1, 4), scalar(2.5));
  EXPECT_EQ(h.f1[0], 1.5);
  EXPECT_EQ(h.f2[0], 1.5);
  EXPECT_EQ(h.f3[0], 1.5);
  const auto z = deviation(triple(7, 7, 7), scalar(7.0));
  EXPECT_EQ(z.f1[0] + z.f2[0] + z.f3[0], 0.0);
}

TEST(AttentionFuse, Examples) {
  EXPECT_EQ(attention_fuse(triple(1, 2, 3))[0], 2.0);
  EXPECT_EQ(attention_fuse(triple(0, 0, 0))[0], 0.0);
  EXPECT_EQ(attention_fuse(triple(1, 1, 4))[0], 4.0);
}

TEST(AttentionFuse, ShapeMismatch) {
  ScaleTriple<double> t{scalar(1), scalar(2), Tensor<double>(Shape{1, 1, 1, 2})};
  EXPECT_THROW(attention_fuse(t), ShapeError);
}

TEST(AttentionFuse, GradientExamples) {
  const std::array<double, 3> outer{1.0, -1.0, 1.0};
  const std::array<double, 3> median{0.0, 1.0, 0.0};
  EXPECT_EQ(tape_grad(1, 1.2, 4), outer);
  EXPECT_EQ(tape_grad(1, 3, 4), median);
  EXPECT_EQ(attention::fuse_grad(1.0, 1.2, 4.0), outer);
}

TEST(AttentionFuse, ClosedFormOracle) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 100000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    ASSERT_NEAR(attention::fuse(a, b, c), closed_form(a, b, c), 1e-12) << a << " " << b << " " << c;
  }
}

TEST(AttentionFuse, AlgebraicProperties) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const double scales[] = {0.25, 0.5, 2.0, 8.0};
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const double d = attention::fuse(a, b, c);
    EXPECT_EQ(d, attention::fuse(a, c, b));
    EXPECT_EQ(d, attention::fuse(b, a, c));
    EXPECT_EQ(d, attention::fuse(b, c, a));
    EXPECT_EQ(d, attention::fuse(c, a, b));
    EXPECT_EQ(d, attention::fuse(c, b, a));
    EXPECT_LE(std::min({a, b, c}), d);
    EXPECT_LE(d, std::max({a, b, c}));
    EXPECT_GE(d, 0.5 * (std::max({a, b, c}) + std::min({a, b, c})));
    const double s = scales[i % 4];
    EXPECT_EQ(attention::fuse(s * a, s * b, s * c), s * d);
  }
}

TEST(AttentionFuse, GradCheckAtSeparatedPoints) {
  // Channels 0..2 of the probe point hold the three scales; 1x1 one-hot convs pick them out.
  Tensor<double> point(Shape{1, 3, 2, 2});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (std::size_t i = 0; i < 4; ++i) {
    double v[3];
    do {
      for (auto& x : v) x = u(rng);
    } while (std::abs(v[0] - v[1]) < 1e-2 || std::abs(v[1] - v[2]) < 1e-2 || std::abs(v[0] - v[2]) < 1e-2);
    for (std::size_t k = 0; k < 3; ++k) point[k * 4 + i] = v[k];
  }
  ConvSpec pick;
  pick.kernel = 1;
  pick.in_channels = 3;
  pick.out_channels = 1;
  pick.has_bias = false;
  const auto r = grad_check(
      [&](Tape<double>& t, Var x) {
        std::array<Var, 3> f;
        for (std::size_t k = 0; k < 3; ++k) {
          Tensor<double> w(Shape{1, 3, 1, 1});
          w[k] = 1.0;
          f[k] = conv2d(t, x, t.leaf(w, false), std::nullopt, pick);
        }
        const Var fused = attention_fuse(t, f[0], f[1], f[2]);
        Tensor<double> w(Shape{1, 1, 4, 1}, std::vector<double>{0.5, -1.25, 2.0, 0.75});
        return sum(t, dense(t, fused, t.leaf(w, false), t.leaf(Tensor<double>(Shape{1, 1, 1, 1}), false)));
      },
      point, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-4);
}
