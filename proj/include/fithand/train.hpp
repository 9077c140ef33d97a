/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fithand/dataset.hpp"
#include "fithand/network.hpp"

namespace fithand {

struct TrainConfig {
  double lr = 1e-4;
  std::size_t epochs = 30;
  std::size_t batch = 16;
  LossKind loss = LossKind::cross_entropy;
  double momentum = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Images resized and scaled to [0, 1], stacked as (n, c, s, s).
struct TensorSet {
  Tensor<float> images;
  std::vector<int> labels;
  std::vector<std::string> subjects;
  std::size_t classes = 0;

  std::size_t size() const { return labels.size(); }
};

/// Set `augment` to expand every sample into its ten augmented copies.
TensorSet prepare(const Dataset& data, std::size_t input_size, bool augment = false);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;      ///< mean over samples
  double accuracy = 0.0;  ///< of the pre-update predictions seen during the epoch
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  /// "epoch,loss,accuracy" header, then one fixed-format line per epoch.
  std::string csv() const;
};

/// Mini-batch SGD. Batch order is reshuffled each epoch from `config.seed`.
/// `progress`, when set, receives one line per epoch.
TrainLog train(Network<float>& net, const TensorSet& data, const TrainConfig& config,
               std::ostream* progress = nullptr);

struct Metrics {
  std::vector<std::vector<std::size_t>> confusion;  ///< rows = truth, cols = prediction
  double accuracy = 0.0;
  std::vector<double> f1;
  double macro_f1 = 0.0;

  std::size_t total() const;
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t classes);

/// Argmax of the logits for every sample.
std::vector<int> predict_labels(const Network<float>& net, const TensorSet& data, std::size_t batch = 32);

Metrics evaluate(const Network<float>& net, const TensorSet& data, std::size_t batch = 32);

/// Aligned confusion/F1 table followed by key=value lines.
std::string format_metrics(const Metrics& m, const std::vector<std::string>& class_names);

}  // namespace fithand
