/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fithand/error.hpp"

namespace fithand {

/// Dimensions of a rank-4 NCHW tensor.
struct Shape {
  std::size_t n = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t size() const noexcept { return n * c * h * w; }
  /// Elements per sample (c * h * w).
  std::size_t sample_size() const noexcept { return c * h * w; }
  std::size_t plane() const noexcept { return h * w; }

  friend bool operator==(const Shape&, const Shape&) = default;

  std::string str() const {
    return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
           std::to_string(w) + ")";
  }
};

/// Dense row-major (n-major, w-minor) tensor with value semantics.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T{0}) : shape_(shape), data_(shape.size(), fill) {
    check_dims();
  }

  Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    check_dims();
    if (data_.size() != shape_.size()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.str());
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) noexcept {
    return data_[offset(n, c, h, w)];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
    return data_[offset(n, c, h, w)];
  }

  /// Pointer to the first element of sample `n`.
  T* sample(std::size_t n) noexcept { return data_.data() + n * shape_.sample_size(); }
  const T* sample(std::size_t n) const noexcept { return data_.data() + n * shape_.sample_size(); }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  /// Same data viewed under new dimensions with an equal element count.
  Tensor reshaped(Shape shape) const {
    if (shape.size() != shape_.size()) {
      throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
    }
    return Tensor(shape, data_);
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(), [](T v) { return static_cast<U>(v); });
    return Tensor<U>(shape_, std::move(out));
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

 private:
  void check_dims() const {
    if (shape_.n == 0 || shape_.c == 0 || shape_.h == 0 || shape_.w == 0) {
      throw ShapeError("tensor dimensions must be positive, got " + shape_.str());
    }
  }

  Shape shape_{0, 0, 0, 0};
  std::vector<T> data_;
};

}  // namespace fithand
