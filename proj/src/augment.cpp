/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fithand/error.hpp"

namespace fithand {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Equalization lookup table for one 8-bit channel.
std::array<std::uint8_t, 256> equalization_lut(const std::vector<std::uint8_t>& values) {
  std::array<std::size_t, 256> hist{};
  for (std::uint8_t v : values) ++hist[v];
  std::array<std::size_t, 256> cdf{};
  std::size_t acc = 0;
  std::size_t cdf_min = 0;
  for (std::size_t v = 0; v < 256; ++v) {
    acc += hist[v];
    cdf[v] = acc;
    if (cdf_min == 0 && acc > 0) cdf_min = acc;
  }
  const std::size_t total = values.size();
  std::array<std::uint8_t, 256> lut{};
  for (std::size_t v = 0; v < 256; ++v) lut[v] = static_cast<std::uint8_t>(v);
  if (total == 0 || cdf_min == total) return lut;  // constant image
  const double span = static_cast<double>(total - cdf_min);
  for (std::size_t v = 0; v < 256; ++v) {
    if (cdf[v] < cdf_min) {
      lut[v] = 0;
      continue;
    }
    lut[v] = to_byte(static_cast<double>(cdf[v] - cdf_min) / span * 255.0);
  }
  return lut;
}

}  // namespace

Image flip_horizontal(const Image& image) {
  Image out(image.width, image.height, image.channels);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < image.channels; ++c) {
        out.at(image.width - 1 - x, y, c) = image.at(x, y, c);
      }
    }
  }
  return out;
}

Image rotate(const Image& image, double degrees) {
  if (degrees == 0.0) return image;
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cx = (static_cast<double>(image.width) - 1.0) / 2.0;
  const double cy = (static_cast<double>(image.height) - 1.0) / 2.0;
  const double max_x = static_cast<double>(image.width) - 1.0;
  const double max_y = static_cast<double>(image.height) - 1.0;
  Image out(image.width, image.height, image.channels, 0);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      // Inverse mapping; y grows downward, so counter-clockwise on screen.
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double sx = cs * dx - sn * dy + cx;
      const double sy = sn * dx + cs * dy + cy;
      if (sx < 0.0 || sy < 0.0 || sx > max_x || sy > max_y) continue;
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const auto y0 = static_cast<std::size_t>(std::floor(sy));
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const std::size_t y1 = std::min(y0 + 1, image.height - 1);
      const double fx = sx - static_cast<double>(x0);
      const double fy = sy - static_cast<double>(y0);
      for (std::size_t c = 0; c < image.channels; ++c) {
        const double top = image.at(x0, y0, c) * (1.0 - fx) + image.at(x1, y0, c) * fx;
        const double bottom = image.at(x0, y1, c) * (1.0 - fx) + image.at(x1, y1, c) * fx;
        out.at(x, y, c) = to_byte(top * (1.0 - fy) + bottom * fy);
      }
    }
  }
  return out;
}

Image histogram_equalize(const Image& image) {
  if (image.channels == 1) {
    const auto lut = equalization_lut(image.pixels);
    Image out = image;
    for (auto& v : out.pixels) v = lut[v];
    return out;
  }
  if (image.channels != 3) throw InputError("histogram equalization needs 1 or 3 channels");

  const std::size_t count = image.width * image.height;
  std::vector<double> luma(count);
  std::vector<std::uint8_t> luma8(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* p = &image.pixels[3 * i];
    luma[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    luma8[i] = to_byte(luma[i]);
  }
  const auto lut = equalization_lut(luma8);
  Image out = image;
  for (std::size_t i = 0; i < count; ++i) {
    const double target = lut[luma8[i]];
    std::uint8_t* p = &out.pixels[3 * i];
    if (luma[i] <= 0.0) {
      p[0] = p[1] = p[2] = static_cast<std::uint8_t>(target);
      continue;
    }
    const double ratio = target / luma[i];
    for (std::size_t c = 0; c < 3; ++c) p[c] = to_byte(p[c] * ratio);
  }
  return out;
}

std::vector<AugmentedImage> augment(const Image& image) {
  std::vector<AugmentedImage> out;
  out.reserve(10);
  out.push_back({"original", image});
  for (double a : kAugmentAngles) {
    const int deg = static_cast<int>(a);
    const std::string tag = "rot_" + std::string(deg < 0 ? "m" : "p") + std::to_string(std::abs(deg));
    out.push_back({tag, rotate(image, a)});
  }
  Image flipped = flip_horizontal(image);
  out.push_back({"histeq", histogram_equalize(image)});
  out.push_back({"histeq_flip", histogram_equalize(flipped)});
  out.push_back({"flip", std::move(flipped)});
  return out;
}

template <typename T>
Tensor<T> resize_bilinear(const Image& image, std::size_t target) {
  if (target < 1) throw ConfigError("resize target must be positive");
  if (image.width == 0 || image.height == 0) throw InputError("cannot resize an empty image");
  Tensor<T> out(Shape{1, image.channels, target, target});
  // (dst + 0.5) * extent / target - 0.5 as one integer ratio, so exact cases stay exact.
  auto source = [target](std::size_t dst, std::size_t extent) {
    const auto num = static_cast<long long>((2 * dst + 1) * extent) - static_cast<long long>(target);
    const double s = static_cast<double>(num) / static_cast<double>(2 * target);
    return std::clamp(s, 0.0, static_cast<double>(extent - 1));
  };
  for (std::size_t y = 0; y < target; ++y) {
    const double sy = source(y, image.height);
    const auto y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < target; ++x) {
      const double sx = source(x, image.width);
      const auto x0 = static_cast<std::size_t>(sx);
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::size_t c = 0; c < image.channels; ++c) {
        const double top = image.at(x0, y0, c) * (1.0 - fx) + image.at(x1, y0, c) * fx;
        const double bottom = image.at(x0, y1, c) * (1.0 - fx) + image.at(x1, y1, c) * fx;
        out.at(0, c, y, x) = static_cast<T>((top * (1.0 - fy) + bottom * fy) / 255.0);
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> resize_and_normalize(const Image& image, std::size_t target) {
  if (target < 8) throw ConfigError("resize target must be at least 8");
  return resize_bilinear<T>(image, target);
}

template Tensor<float> resize_bilinear<float>(const Image&, std::size_t);
template Tensor<double> resize_bilinear<double>(const Image&, std::size_t);
template Tensor<float> resize_and_normalize<float>(const Image&, std::size_t);
template Tensor<double> resize_and_normalize<double>(const Image&, std::size_t);

}  // namespace fithand
