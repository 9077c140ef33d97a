/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "fithand/conv.hpp"
#include "fithand/param.hpp"
#include "fithand/tape.hpp"

namespace fithand {

/// How the three multi-scale responses are merged into one map.
enum class Fusion { attention, concat, concat_sigmoid, average, median };

std::string_view fusion_name(Fusion f);

/// Multi-scale block: parallel 3x3 / 5x5 / 7x7 stride-1 convolutions with depth
/// `depth`, merged by `fusion`. Concat modes project 3*depth channels back to
/// `depth` with a 1x1 convolution.
struct FineFeatSpec {
  std::size_t in_channels = 1;
  std::size_t depth = 1;
  Fusion fusion = Fusion::attention;
  bool projection_relu = true;  ///< ReLU after the concat projection

  void validate() const;
};

inline constexpr std::array<std::size_t, 3> kFineFeatKernels{3, 5, 7};

/// Parameter tensors in the order finefeat_forward expects them.
std::vector<ParamDesc> finefeat_params(const FineFeatSpec& spec);

/// sum_k (k^2 * in * d + d) over k in {3, 5, 7}, plus the projection for concat modes.
std::size_t finefeat_param_count(const FineFeatSpec& spec);

/// Spec of the multi-scale branch with the given kernel size.
ConvSpec finefeat_conv(const FineFeatSpec& spec, std::size_t kernel);

template <typename T>
Var finefeat_forward(Tape<T>& tape, Var input, const FineFeatSpec& spec,
                     std::span<const Var> params);

/// Elementwise arithmetic mean of three maps.
template <typename T>
Var mean3(Tape<T>& tape, Var a, Var b, Var c);

/// Elementwise median of three maps. The gradient flows to the middle element of
/// an index-stable sort, so equal values are ordered by scale index.
template <typename T>
Var median3(Tape<T>& tape, Var a, Var b, Var c);

}  // namespace fithand
