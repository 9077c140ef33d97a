/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fithand/conv.hpp"
#include "fithand/tape.hpp"

namespace fithand {

/// Cross-channel local response normalization constants.
struct LrnParams {
  double k = 2.0;
  std::size_t size = 5;  ///< odd window of adjacent channels
  double alpha = 1e-4;
  double beta = 0.75;
};

enum class LossKind { cross_entropy, kl_divergence };

std::string_view loss_name(LossKind kind);
LossKind parse_loss(std::string_view name);  ///< "ce" / "kl" and long forms

template <typename T>
struct LossValue {
  T loss{};
  Tensor<T> grad;  ///< d(loss)/d(logits)
};

// Differentiable primitives. Each records one tape entry.

template <typename T>
Var conv2d(Tape<T>& tape, Var input, Var weights, std::optional<Var> bias, const ConvSpec& spec);

template <typename T>
Var relu(Tape<T>& tape, Var x);

template <typename T>
Var sigmoid(Tape<T>& tape, Var x);

template <typename T>
Var add(Tape<T>& tape, Var a, Var b);

/// Concatenates along the channel axis.
template <typename T>
Var concat_channels(Tape<T>& tape, std::span<const Var> parts);

/// out = in / (k + alpha * sum_{window} in^2)^beta, window clipped at channel edges.
template <typename T>
Var lrn(Tape<T>& tape, Var x, const LrnParams& params);

/// Divides each flattened sample by max(||v||_2, epsilon).
template <typename T>
Var l2_normalize(Tape<T>& tape, Var x, double epsilon);

/// Flattens each sample and applies logits = x W + b. W is (1, 1, features, classes),
/// b is (1, 1, 1, classes); output is (n, classes, 1, 1).
template <typename T>
Var dense(Tape<T>& tape, Var x, Var weights, Var bias);

/// Sum of all elements as a (1, 1, 1, 1) value.
template <typename T>
Var sum(Tape<T>& tape, Var x);

/// Mean over the batch of -log softmax(logits)[label], max-subtracted.
template <typename T>
LossValue<T> cross_entropy_loss(const Tensor<T>& logits, std::span<const int> labels);

/// Mean over the batch of KL(target || softmax(logits)); targets are one-hot labels.
template <typename T>
LossValue<T> kl_divergence_loss(const Tensor<T>& logits, std::span<const int> labels);

template <typename T>
Var loss(Tape<T>& tape, Var logits, std::span<const int> labels, LossKind kind);

}  // namespace fithand
