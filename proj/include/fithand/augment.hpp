/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <string>
#include <vector>

#include "fithand/image.hpp"
#include "fithand/tensor.hpp"

namespace fithand {

/// Mirror about the vertical axis.
Image flip_horizontal(const Image& image);

/// Rotation about the image centre by `degrees` (positive = counter-clockwise as
/// displayed), bilinear sampling, black outside the source. 0 returns an exact copy.
Image rotate(const Image& image, double degrees);

/// out(v) = round((cdf(v) - cdf_min) / (N - cdf_min) * 255). A constant image is
/// returned unchanged. Three-channel images are equalized on BT.601 luminance and
/// each pixel's RGB is rescaled by the luminance ratio.
Image histogram_equalize(const Image& image);

inline constexpr std::array<double, 6> kAugmentAngles{-45.0, -30.0, -15.0, 15.0, 30.0, 45.0};

struct AugmentedImage {
  std::string tag;
  Image image;
};

/// Ten images: the original, six rotations, the horizontal flip, the equalized
/// original and the equalized flip.
std::vector<AugmentedImage> augment(const Image& image);

/// Bilinear resize to target x target (half-pixel centres) scaled to [0, 1],
/// returned as a (1, c, target, target) tensor. Any positive target.
template <typename T>
Tensor<T> resize_bilinear(const Image& image, std::size_t target);

/// resize_bilinear for network inputs; target must be at least 8.
template <typename T>
Tensor<T> resize_and_normalize(const Image& image, std::size_t target);

}  // namespace fithand
