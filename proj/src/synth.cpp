/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fithand/error.hpp"

namespace fs = std::filesystem;

namespace fithand {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax;
  const double vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (ax + t * vx);
  const double dy = py - (ay + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

GestureParams gesture_template(std::size_t cls) {
  GestureParams p;
  p.strokes = synth_stroke_count(cls);
  // Classes sharing a stroke count differ by fan spread and tilt.
  const double group = static_cast<double>(cls / 5);
  p.fan = 0.25 * group;
  p.rotation = group == 0.0 ? 0.0 : (static_cast<int>(group) % 2 ? 0.35 : -0.35);
  return p;
}

GestureParams jitter_gesture(std::size_t cls, std::size_t subject, std::mt19937_64& rng) {
  GestureParams p = gesture_template(cls);
  p.cx += uniform(rng, -0.05, 0.05);
  p.cy += uniform(rng, -0.04, 0.04);
  p.palm_rx *= uniform(rng, 0.9, 1.1);
  p.palm_ry *= uniform(rng, 0.9, 1.1);
  p.finger_length *= uniform(rng, 0.88, 1.12);
  p.finger_width *= uniform(rng, 0.85, 1.15);
  p.rotation += uniform(rng, -0.15, 0.15);
  p.fan += uniform(rng, -0.06, 0.06);
  // Subjects differ in skin tone and lighting.
  p.foreground = (subject % 2 ? 175.0 : 210.0) + uniform(rng, -15.0, 15.0);
  p.background = (subject % 2 ? 45.0 : 25.0) + uniform(rng, -10.0, 10.0);
  p.noise = 12.0;
  return p;
}

Image render_gesture(const GestureParams& p, std::size_t size, std::mt19937_64& rng) {
  const double s = static_cast<double>(size);
  // Finger base points sit on the upper arc of the palm; tips point outward.
  struct Segment {
    double ax, ay, bx, by;
  };
  std::vector<Segment> fingers;
  const double spread = 1.6 + p.fan;
  for (std::size_t k = 0; k < p.strokes; ++k) {
    const double t = p.strokes == 1 ? 0.0
                                    : static_cast<double>(k) / static_cast<double>(p.strokes - 1) - 0.5;
    const double angle = -std::numbers::pi / 2.0 + p.rotation + t * spread;
    const double ux = std::cos(angle);
    const double uy = std::sin(angle);
    const double ax = p.cx + 0.8 * p.palm_rx * ux;
    const double ay = p.cy + 0.8 * p.palm_ry * uy;
    fingers.push_back({ax * s, ay * s, (ax + p.finger_length * ux) * s, (ay + p.finger_length * uy) * s});
  }
  const double half_width = p.finger_width * s / 2.0;
  const double cx = p.cx * s;
  const double cy = p.cy * s;
  const double rx = p.palm_rx * s;
  const double ry = p.palm_ry * s;
  const double cr = std::cos(p.rotation);
  const double sr = std::sin(p.rotation);

  Image img(size, size, 1);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double px = static_cast<double>(x) + 0.5;
      const double py = static_cast<double>(y) + 0.5;
      const double lx = cr * (px - cx) + sr * (py - cy);
      const double ly = -sr * (px - cx) + cr * (py - cy);
      bool inside = (lx * lx) / (rx * rx) + (ly * ly) / (ry * ry) <= 1.0;
      for (const auto& f : fingers) {
        if (inside) break;
        inside = segment_distance(px, py, f.ax, f.ay, f.bx, f.by) <= half_width;
      }
      double v = inside ? p.foreground : p.background;
      if (p.noise > 0.0) v += uniform(rng, -p.noise, p.noise);
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return img;
}

std::size_t synth_dataset(const SynthSpec& spec, const fs::path& out) {
  if (spec.classes < 2) throw ConfigError("synth needs at least 2 classes");
  if (spec.per_class < 1) throw ConfigError("synth needs at least 1 image per class");
  if (spec.size < 8) throw ConfigError("synth image size must be at least 8");
  std::mt19937_64 rng(spec.seed);
  std::size_t written = 0;
  for (std::size_t subject = 0; subject < kSynthSubjects.size(); ++subject) {
    for (std::size_t cls = 0; cls < spec.classes; ++cls) {
      char name[32];
      std::snprintf(name, sizeof name, "gesture_%02zu", cls);
      const fs::path dir = out / kSynthSubjects[subject] / name;
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
      for (std::size_t i = 0; i < spec.per_class; ++i) {
        const GestureParams params = jitter_gesture(cls, subject, rng);
        const Image img = render_gesture(params, spec.size, rng);
        char file[32];
        std::snprintf(file, sizeof file, "img_%03zu.pgm", i);
        write_pnm(dir / file, img);
        ++written;
      }
    }
  }
  return written;
}

}  // namespace fithand
