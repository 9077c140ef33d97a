/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "fithand/tensor.hpp"

namespace fithand {

/// Square 2-D convolution hyper-parameters.
struct ConvSpec {
  std::size_t kernel = 3;  ///< odd, u = v
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t pad = 0;  ///< per side
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  bool has_bias = true;

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

/// Span covered by a k-tap kernel whose taps sit `dilation` apart: k + (k-1)(D-1).
constexpr std::size_t effective_kernel(std::size_t kernel, std::size_t dilation) noexcept {
  return kernel + (kernel - 1) * (dilation - 1);
}

/// Stride-1 spec whose output keeps the input's spatial size.
ConvSpec same_conv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                   std::size_t dilation = 1);

/// floor((in + 2 pad - R) / S) + 1; throws ConfigError when the result would be < 1.
std::size_t conv_output_size(std::size_t in, const ConvSpec& spec);

/// Validates `spec` and the weight/input dimensions; returns the output shape.
Shape conv_output_shape(const Shape& input, const Shape& weights, const ConvSpec& spec);

/// Weight tensor dimensions for `spec`: (out, in, k, k).
Shape conv_weight_shape(const ConvSpec& spec);

/// Number of learnable values (weights plus optional bias).
std::size_t conv_param_count(const ConvSpec& spec);

// Parallel kernels: im2col + blocked products, OpenMP across samples. Results do
// not depend on the thread count; cross-sample reductions are summed in sample order.
namespace kernels {

template <typename T>
void conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, std::span<const T> bias,
                    const ConvSpec& spec, Tensor<T>& output);

/// grad_input = d(output)/d(input)^T * grad_output (grad_input is overwritten).
template <typename T>
void conv2d_backward_data(const Tensor<T>& grad_output, const Tensor<T>& weights,
                          const ConvSpec& spec, Tensor<T>& grad_input);

/// grad_weights and grad_bias are overwritten; grad_bias may be empty.
template <typename T>
void conv2d_backward_filter(const Tensor<T>& input, const Tensor<T>& grad_output,
                            const ConvSpec& spec, Tensor<T>& grad_weights,
                            std::span<T> grad_bias);

}  // namespace kernels

// Straightforward serial loops over every output tap. Kept as the test oracle
// and benchmark baseline for `kernels`.
namespace reference {

template <typename T>
void conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, std::span<const T> bias,
                    const ConvSpec& spec, Tensor<T>& output);

template <typename T>
void conv2d_backward_data(const Tensor<T>& grad_output, const Tensor<T>& weights,
                          const ConvSpec& spec, Tensor<T>& grad_input);

template <typename T>
void conv2d_backward_filter(const Tensor<T>& input, const Tensor<T>& grad_output,
                            const ConvSpec& spec, Tensor<T>& grad_weights,
                            std::span<T> grad_bias);

}  // namespace reference

}  // namespace fithand
