/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <iosfwd>

namespace fithand {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Command-line entry point: synth, augment, train, eval, audit, gradcheck,
/// dump-activations. Returns 0 on success, 1 on usage errors, 2 on runtime errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fithand
