/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "fithand/tensor.hpp"

namespace fithand {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::size_t id = none;

  bool valid() const noexcept { return id != none; }
};

/// Reverse-mode gradient tape.
///
/// Every primitive appends one entry holding its output value and a closure that
/// maps the output gradient to input gradients. `backward` walks the entries in
/// reverse execution order, visiting each recorded primitive once.
template <typename T>
class Tape {
 public:
  /// Receives the tape, the gradient of the entry's output and the entry itself.
  using Backward = std::function<void(Tape&, const Tensor<T>&, Var)>;

  Var leaf(Tensor<T> value, bool requires_grad = true) {
    entries_.push_back(Entry{std::move(value), {}, nullptr, requires_grad && grad_enabled_});
    return Var{entries_.size() - 1};
  }

  /// Records a primitive. The closure is dropped when no input needs a gradient.
  Var record(Tensor<T> value, std::initializer_list<Var> inputs, Backward backward) {
    return record(std::move(value), std::vector<Var>(inputs), std::move(backward));
  }

  Var record(Tensor<T> value, const std::vector<Var>& inputs, Backward backward) {
    bool needs = false;
    if (grad_enabled_) {
      for (Var in : inputs) needs = needs || entries_.at(in.id).requires_grad;
    }
    entries_.push_back(Entry{std::move(value), {}, needs ? std::move(backward) : nullptr, needs});
    return Var{entries_.size() - 1};
  }

  const Tensor<T>& value(Var v) const { return entries_.at(v.id).value; }
  bool requires_grad(Var v) const { return entries_.at(v.id).requires_grad; }
  bool has_grad(Var v) const { return !entries_.at(v.id).grad.empty(); }

  /// Gradient buffer of `v`, allocated as zeros on first access.
  Tensor<T>& grad(Var v) {
    Entry& e = entries_.at(v.id);
    if (e.grad.empty()) e.grad = Tensor<T>(e.value.shape());
    return e.grad;
  }

  /// Adds `g` into the gradient of `v` if `v` takes part in differentiation.
  void accumulate(Var v, const Tensor<T>& g) {
    if (!requires_grad(v)) return;
    Tensor<T>& dst = grad(v);
    if (dst.shape() != g.shape()) {
      throw ShapeError("gradient shape " + g.shape().str() + " does not match value " +
                       dst.shape().str());
    }
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }

  /// Seeds d(root)/d(root) = 1 and propagates to every recorded input.
  void backward(Var root) {
    if (value(root).size() != 1) {
      throw ShapeError("backward() needs a scalar root, got " + value(root).shape().str());
    }
    visited_.clear();
    grad(root).fill(T{1});
    for (std::size_t i = root.id + 1; i-- > 0;) {
      Entry& e = entries_[i];
      if (!e.backward || e.grad.empty()) continue;
      visited_.push_back(i);
      const Tensor<T> out_grad = e.grad;
      e.backward(*this, out_grad, Var{i});
    }
  }

  /// Entry ids visited by the last backward(), in visiting order.
  const std::vector<std::size_t>& visit_order() const noexcept { return visited_; }

  std::size_t size() const noexcept { return entries_.size(); }

  /// When disabled, new entries neither require gradients nor keep closures.
  void set_grad_enabled(bool enabled) noexcept { grad_enabled_ = enabled; }
  bool grad_enabled() const noexcept { return grad_enabled_; }

 private:
  struct Entry {
    Tensor<T> value;
    Tensor<T> grad;
    Backward backward;
    bool requires_grad = false;
  };

  std::vector<Entry> entries_;
  std::vector<std::size_t> visited_;
  bool grad_enabled_ = true;
};

}  // namespace fithand
