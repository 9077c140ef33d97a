/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fithand/network.hpp"

namespace fithand {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian layout:
///   "FITH" | u32 version | u32 config length | config text | u32 tensor count |
///   per tensor { u16 name length | name | u8 ndim | u32 dims[ndim] | f32 payload } |
///   u32 CRC-32 of every byte after the magic.
std::vector<std::uint8_t> serialize_checkpoint(const Network<float>& net);

/// Throws CheckpointError with a kind matching the first defect found.
Network<float> parse_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Network<float>& net, const std::filesystem::path& path);
Network<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace fithand
