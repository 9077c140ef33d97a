/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/image.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include <png.h>

#include "fithand/error.hpp"

namespace fithand {

namespace {

std::string extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::size_t header_number(std::istream& in, const std::filesystem::path& path) {
  int ch = in.get();
  while (in && (std::isspace(ch) || ch == '#')) {
    if (ch == '#') {
      while (in && ch != '\n') ch = in.get();
    }
    ch = in.get();
  }
  if (!in || !std::isdigit(ch)) throw IoError("malformed PNM header in " + path.string());
  std::size_t value = 0;
  while (in && std::isdigit(ch)) {
    value = value * 10 + static_cast<std::size_t>(ch - '0');
    ch = in.get();
  }
  return value;  // consumes exactly one trailing whitespace byte
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw IoError("not a binary PGM/PPM file: " + path.string());
  }
  const std::size_t channels = magic[1] == '5' ? 1 : 3;
  const std::size_t width = header_number(in, path);
  const std::size_t height = header_number(in, path);
  const std::size_t maxval = header_number(in, path);
  if (width == 0 || height == 0) throw IoError("empty image in " + path.string());
  if (maxval == 0 || maxval > 255) {
    throw IoError("only 8-bit PGM/PPM is supported: " + path.string());
  }
  Image img(width, height, channels);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw IoError("truncated pixel data in " + path.string());
  }
  return img;
}

Image read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw IoError("cannot decode PNG " + path.string() + ": " + png.message);
  }
  const bool gray = (png.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Image img(png.width, png.height, gray ? 1 : 3);
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return img;
}

}  // namespace

bool is_supported_image(const std::filesystem::path& path) {
  const std::string ext = extension(path);
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

Image read_image(const std::filesystem::path& path) {
  const std::string ext = extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm") return read_pnm(path);
  throw IoError("unsupported image extension: " + path.string());
}

void write_pnm(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw IoError("PNM output needs 1 or 3 channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << (image.channels == 1 ? "P5" : "P6") << '\n'
      << image.width << ' ' << image.height << '\n'
      << "255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace fithand
