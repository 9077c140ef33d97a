/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fithand/image.hpp"

namespace fithand {

struct SynthSpec {
  std::size_t classes = 4;
  std::size_t per_class = 50;  // per class and subject
  std::size_t size = 64;
  std::uint64_t seed = 7;
};

inline const std::vector<std::string> kSynthSubjects{"A", "B"};

/// Fingers drawn for class `c`.
constexpr std::size_t synth_stroke_count(std::size_t c) { return c % 5 + 1; }

/// Geometry of one hand-like blob, in units of the image side.
struct GestureParams {
  double cx = 0.5;
  double cy = 0.62;
  double palm_rx = 0.17;
  double palm_ry = 0.14;
  double finger_length = 0.28;
  double finger_width = 0.045;
  double rotation = 0.0;   // radians
  double fan = 0.0;        // extra spread, radians
  std::size_t strokes = 1;
  double foreground = 200.0;
  double background = 30.0;
  double noise = 0.0;      // uniform amplitude in gray levels
};

/// Noise-free class template.
GestureParams gesture_template(std::size_t cls);

/// Template with per-sample jitter drawn from `rng`.
GestureParams jitter_gesture(std::size_t cls, std::size_t subject, std::mt19937_64& rng);

Image render_gesture(const GestureParams& params, std::size_t size, std::mt19937_64& rng);

/// Writes out/<subject>/gesture_NN/img_NNN.pgm for subjects A and B.
/// Returns the number of files written.
std::size_t synth_dataset(const SynthSpec& spec, const std::filesystem::path& out);

}  // namespace fithand
