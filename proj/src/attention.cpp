/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/attention.hpp"

#include <algorithm>
#include <cmath>

namespace fithand {

namespace {

template <typename T>
void check_triple(const Shape& a, const Shape& b, const Shape& c) {
  if (a != b || a != c) {
    throw ShapeError("attention inputs differ: " + a.str() + ", " + b.str() + ", " + c.str());
  }
}

// Lowest index wins ties.
template <typename T>
std::size_t arg_max(const std::array<T, 3>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

template <typename T>
std::size_t arg_min(const std::array<T, 3>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

template <typename T>
T sign(T v) {
  return static_cast<T>((v > T{0}) - (v < T{0}));
}

}  // namespace

namespace attention {

template <typename T>
T fuse(T a, T b, T c) noexcept {
  const T hi = std::max({a, b, c});
  const T lo = std::min({a, b, c});
  const T phi = T{0.5} * (hi + lo);
  const T dev = std::min({std::abs(phi - a), std::abs(phi - b), std::abs(phi - c)});
  // Guards the upper bound against a last-bit rounding overshoot.
  return std::min(phi + dev, hi);
}

template <typename T>
std::array<T, 3> fuse_grad(T a, T b, T c) noexcept {
  const std::array<T, 3> f{a, b, c};
  const std::size_t imax = arg_max(f);
  const std::size_t imin = arg_min(f);
  const T phi = T{0.5} * (f[imax] + f[imin]);

  std::array<T, 3> dphi{};
  dphi[imax] += T{0.5};
  dphi[imin] += T{0.5};

  const std::array<T, 3> gamma{std::abs(phi - a), std::abs(phi - b), std::abs(phi - c)};
  const std::size_t j = arg_min(gamma);
  const T s = sign(phi - f[j]);

  // d delta = d phi + s * (d phi - e_j)
  std::array<T, 3> g{};
  for (std::size_t i = 0; i < 3; ++i) g[i] = dphi[i] + s * dphi[i];
  g[j] -= s;
  return g;
}

}  // namespace attention

template <typename T>
Tensor<T> midrange(const ScaleTriple<T>& t) {
  check_triple<T>(t.f1.shape(), t.f2.shape(), t.f3.shape());
  Tensor<T> out(t.f1.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = T{0.5} * (std::max({t.f1[i], t.f2[i], t.f3[i]}) + std::min({t.f1[i], t.f2[i], t.f3[i]}));
  }
  return out;
}

template <typename T>
ScaleTriple<T> deviation(const ScaleTriple<T>& t, const Tensor<T>& phi) {
  check_triple<T>(t.f1.shape(), t.f2.shape(), t.f3.shape());
  if (phi.shape() != t.f1.shape()) {
    throw ShapeError("midrange shape " + phi.shape().str() + " does not match responses " +
                     t.f1.shape().str());
  }
  ScaleTriple<T> out{Tensor<T>(phi.shape()), Tensor<T>(phi.shape()), Tensor<T>(phi.shape())};
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out.f1[i] = std::abs(phi[i] - t.f1[i]);
    out.f2[i] = std::abs(phi[i] - t.f2[i]);
    out.f3[i] = std::abs(phi[i] - t.f3[i]);
  }
  return out;
}

template <typename T>
Tensor<T> attention_fuse(const ScaleTriple<T>& t) {
  check_triple<T>(t.f1.shape(), t.f2.shape(), t.f3.shape());
  Tensor<T> out(t.f1.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = attention::fuse(t.f1[i], t.f2[i], t.f3[i]);
  return out;
}

template <typename T>
Var attention_fuse(Tape<T>& tape, Var f1, Var f2, Var f3) {
  const Tensor<T>& a = tape.value(f1);
  const Tensor<T>& b = tape.value(f2);
  const Tensor<T>& c = tape.value(f3);
  check_triple<T>(a.shape(), b.shape(), c.shape());
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = attention::fuse(a[i], b[i], c[i]);

  return tape.record(std::move(out), {f1, f2, f3}, [f1, f2, f3](Tape<T>& t, const Tensor<T>& g,
                                                                Var) {
    const Tensor<T>& va = t.value(f1);
    const Tensor<T>& vb = t.value(f2);
    const Tensor<T>& vc = t.value(f3);
    Tensor<T> ga(va.shape());
    Tensor<T> gb(va.shape());
    Tensor<T> gc(va.shape());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto d = attention::fuse_grad(va[i], vb[i], vc[i]);
      ga[i] = g[i] * d[0];
      gb[i] = g[i] * d[1];
      gc[i] = g[i] * d[2];
    }
    t.accumulate(f1, ga);
    t.accumulate(f2, gb);
    t.accumulate(f3, gc);
  });
}

#define FITHAND_INSTANTIATE_ATTENTION(T)                                              \
  template T attention::fuse<T>(T, T, T) noexcept;                                    \
  template std::array<T, 3> attention::fuse_grad<T>(T, T, T) noexcept;                \
  template Tensor<T> midrange<T>(const ScaleTriple<T>&);                              \
  template ScaleTriple<T> deviation<T>(const ScaleTriple<T>&, const Tensor<T>&);      \
  template Tensor<T> attention_fuse<T>(const ScaleTriple<T>&);                        \
  template Var attention_fuse<T>(Tape<T>&, Var, Var, Var);

FITHAND_INSTANTIATE_ATTENTION(float)
FITHAND_INSTANTIATE_ATTENTION(double)

#undef FITHAND_INSTANTIATE_ATTENTION

}  // namespace fithand
