/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>

#include "fithand/tape.hpp"

namespace fithand {

/// Three same-shape responses of the 3x3, 5x5 and 7x7 branches.
template <typename T>
struct ScaleTriple {
  Tensor<T> f1;
  Tensor<T> f2;
  Tensor<T> f3;
};

// Parameter-free fusion of three multi-scale responses, evaluated per element:
//
//   phi   = (max(f) + min(f)) / 2
//   gamma = |phi - f_i|
//   delta = phi + min_i gamma_i
//
// For sorted a <= b <= c this reduces to max(b, a + c - b).

template <typename T>
Tensor<T> midrange(const ScaleTriple<T>& t);

template <typename T>
ScaleTriple<T> deviation(const ScaleTriple<T>& t, const Tensor<T>& phi);

template <typename T>
Tensor<T> attention_fuse(const ScaleTriple<T>& t);

/// Differentiable version of attention_fuse.
template <typename T>
Var attention_fuse(Tape<T>& tape, Var f1, Var f2, Var f3);

namespace attention {

template <typename T>
T fuse(T a, T b, T c) noexcept;

/// Subgradient of fuse() w.r.t. (a, b, c). Max, min and smallest-deviation
/// selections break ties toward the lowest index; sign(0) = 0.
template <typename T>
std::array<T, 3> fuse_grad(T a, T b, T c) noexcept;

}  // namespace attention

}  // namespace fithand
