/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <span>
#include <vector>

#include "fithand/tensor.hpp"

namespace fithand {

/// w <- w - lr * g for every aligned (param, grad) pair.
template <typename T>
void sgd_step(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads, T lr);

/// Plain SGD by default; a non-zero momentum keeps a velocity v <- mu v + g and
/// steps w <- w - lr v.
template <typename T>
class Sgd {
 public:
  Sgd(T lr, T momentum = T{0});

  void step(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads);

  T lr() const noexcept { return lr_; }
  T momentum() const noexcept { return momentum_; }

 private:
  T lr_;
  T momentum_;
  std::vector<Tensor<T>> velocity_;
};

}  // namespace fithand
