/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fithand/image.hpp"

namespace fithand {

struct Sample {
  Image image;
  std::size_t label = 0;
  std::string subject;
  std::filesystem::path path;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> class_names;
  std::size_t channels = 0;

  std::size_t size() const { return samples.size(); }
  std::size_t classes() const { return class_names.size(); }
  bool empty() const { return samples.empty(); }
  /// Distinct subject ids in sorted order.
  std::vector<std::string> subjects() const;
  /// Copy holding only the samples at `indices`, in that order.
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

/// Reads root/<subject>/<class>/<file>. Samples are ordered by path; labels index
/// the sorted class directory names.
Dataset load_dataset(const std::filesystem::path& root);

enum class SplitMode { sd, si };

SplitMode parse_split_mode(const std::string& text);

struct SplitPlan {
  SplitMode mode = SplitMode::sd;
  std::vector<std::string> train_subjects;  // SI only
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
};

/// SD: seeded Fisher-Yates, first floor(0.8 N) go to train.
/// SI: listed subjects go to train, every other subject to test.
Split split(const Dataset& data, const SplitPlan& plan);

/// floor(0.8 n) computed in integers.
constexpr std::size_t sd_train_count(std::size_t n) { return n * 4 / 5; }

}  // namespace fithand
