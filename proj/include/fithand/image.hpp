/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fithand {

/// 8-bit image, interleaved HWC, 1 or 3 channels.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(w * h * c, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return pixels[(y * width + x) * channels + c];
  }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return pixels[(y * width + x) * channels + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Decodes binary PGM (P5) / PPM (P6) or PNG, chosen by extension.
Image read_image(const std::filesystem::path& path);

/// Writes P5 for one channel, P6 for three.
void write_pnm(const std::filesystem::path& path, const Image& image);

/// True for the extensions read_image understands (.png, .pgm, .ppm).
bool is_supported_image(const std::filesystem::path& path);

}  // namespace fithand
