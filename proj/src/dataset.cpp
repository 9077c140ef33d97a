/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "fithand/error.hpp"

namespace fs = std::filesystem;

namespace fithand {

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> entries;
  for (const auto& entry : fs::directory_iterator(dir)) entries.push_back(entry.path());
  std::sort(entries.begin(), entries.end());
  return entries;
}

}  // namespace

std::vector<std::string> Dataset::subjects() const {
  std::set<std::string> ids;
  for (const auto& s : samples) ids.insert(s.subject);
  return {ids.begin(), ids.end()};
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.class_names = class_names;
  out.channels = channels;
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) out.samples.push_back(samples.at(i));
  return out;
}

Dataset load_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw InputError("dataset root is not a directory: " + root.string());

  struct Entry {
    fs::path path;
    std::string subject;
    std::string cls;
  };
  std::vector<Entry> entries;
  std::set<std::string> class_set;
  for (const auto& subject_dir : sorted_entries(root)) {
    if (!fs::is_directory(subject_dir)) {
      throw InputError("expected a subject directory, found file: " + subject_dir.string());
    }
    for (const auto& class_dir : sorted_entries(subject_dir)) {
      if (!fs::is_directory(class_dir)) {
        throw InputError("expected a class directory, found file: " + class_dir.string());
      }
      class_set.insert(class_dir.filename().string());
      for (const auto& file : sorted_entries(class_dir)) {
        if (!is_supported_image(file)) {
          throw InputError("unsupported file in dataset: " + file.string());
        }
        entries.push_back({file, subject_dir.filename().string(), class_dir.filename().string()});
      }
    }
  }
  if (entries.empty()) throw InputError("no images found under " + root.string());

  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.path < b.path; });

  Dataset data;
  data.class_names.assign(class_set.begin(), class_set.end());
  data.samples.reserve(entries.size());
  for (const auto& e : entries) {
    Sample s;
    try {
      s.image = read_image(e.path);
    } catch (const IoError& err) {
      throw InputError(std::string("cannot decode image: ") + err.what());
    }
    if (data.channels == 0) data.channels = s.image.channels;
    if (s.image.channels != data.channels) {
      throw InputError("mixed channel counts: " + e.path.string() + " has " +
                       std::to_string(s.image.channels) + ", expected " + std::to_string(data.channels));
    }
    const auto it = std::lower_bound(data.class_names.begin(), data.class_names.end(), e.cls);
    s.label = static_cast<std::size_t>(it - data.class_names.begin());
    s.subject = e.subject;
    s.path = e.path;
    data.samples.push_back(std::move(s));
  }
  return data;
}

SplitMode parse_split_mode(const std::string& text) {
  if (text == "sd" || text == "SD") return SplitMode::sd;
  if (text == "si" || text == "SI") return SplitMode::si;
  throw ConfigError("unknown split mode '" + text + "' (expected sd or si)");
}

Split split(const Dataset& data, const SplitPlan& plan) {
  if (data.empty()) throw InputError("cannot split an empty dataset");
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  if (plan.mode == SplitMode::sd) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(plan.seed);
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_train = sd_train_count(order.size());
    train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
  } else {
    const auto subjects = data.subjects();
    if (subjects.size() < 2) throw ConfigError("SI split needs at least 2 subjects");
    if (plan.train_subjects.empty()) throw ConfigError("SI split needs at least one training subject");
    const std::set<std::string> chosen(plan.train_subjects.begin(), plan.train_subjects.end());
    for (const auto& s : chosen) {
      if (!std::binary_search(subjects.begin(), subjects.end(), s)) {
        throw ConfigError("SI training subject not in dataset: " + s);
      }
    }
    if (chosen.size() == subjects.size()) throw ConfigError("SI split leaves no test subject");
    for (std::size_t i = 0; i < data.size(); ++i) {
      (chosen.count(data.samples[i].subject) ? train : test).push_back(i);
    }
  }
  return {data.subset(train), data.subset(test)};
}

}  // namespace fithand
