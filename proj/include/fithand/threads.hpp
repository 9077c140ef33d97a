/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace fithand {

/// Parses a FITHAND_THREADS value; empty or non-positive text yields nullopt.
std::optional<std::size_t> parse_thread_cap(std::string_view text);

/// Caps the worker pool at FITHAND_THREADS when set. Returns the thread count in effect.
std::size_t configure_threads();

}  // namespace fithand
