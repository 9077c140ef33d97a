/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/threads.hpp"

#include <charconv>
#include <cstdlib>

#include <omp.h>

namespace fithand {

std::optional<std::size_t> parse_thread_cap(std::string_view text) {
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || value == 0) return std::nullopt;
  return value;
}

std::size_t configure_threads() {
  if (const char* env = std::getenv("FITHAND_THREADS")) {
    if (const auto cap = parse_thread_cap(env)) {
      const int current = omp_get_max_threads();
      if (static_cast<std::size_t>(current) > *cap) omp_set_num_threads(static_cast<int>(*cap));
    }
  }
  return static_cast<std::size_t>(omp_get_max_threads());
}

}  // namespace fithand
