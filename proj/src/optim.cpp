/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/optim.hpp"

#include <string>

namespace fithand {

namespace {

template <typename T>
void check_aligned(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("optimizer got " + std::to_string(params.size()) + " parameters and " +
                     std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape()) {
      throw ShapeError("parameter " + std::to_string(i) + " is " + params[i].shape().str() +
                       " but its gradient is " + grads[i].shape().str());
    }
  }
}

}  // namespace

template <typename T>
void sgd_step(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads, T lr) {
  check_aligned(params, grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].data();
    auto g = grads[i].data();
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
  }
}

template <typename T>
Sgd<T>::Sgd(T lr, T momentum) : lr_(lr), momentum_(momentum) {
  if (!(lr >= T{0})) throw ConfigError("learning rate must be non-negative");
  if (!(momentum >= T{0} && momentum < T{1})) throw ConfigError("momentum must lie in [0, 1)");
}

template <typename T>
void Sgd<T>::step(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads) {
  if (momentum_ == T{0}) {
    sgd_step(params, grads, lr_);
    return;
  }
  check_aligned(params, grads);
  if (velocity_.empty()) {
    for (const auto& p : params) velocity_.emplace_back(p.shape());
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto v = velocity_[i].data();
    auto w = params[i].data();
    auto g = grads[i].data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      v[j] = momentum_ * v[j] + g[j];
      w[j] -= lr_ * v[j];
    }
  }
}

template void sgd_step<float>(std::span<Tensor<float>>, std::span<const Tensor<float>>, float);
template void sgd_step<double>(std::span<Tensor<double>>, std::span<const Tensor<double>>, double);
template class Sgd<float>;
template class Sgd<double>;

}  // namespace fithand
