/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fithand/tape.hpp"

namespace fithand {

inline constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  ///< at worst_index
  double numeric = 0.0;   ///< at worst_index
  std::size_t probes = 0;
};

/// Scalar-valued function of one tensor, recorded on a 64-bit tape.
using ScalarFunction = std::function<Var(Tape<double>&, Var)>;

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// Compares the reverse-mode gradient of `f` at `point` with central differences
/// (f(x+h) - f(x-h)) / 2h. `h` must lie in [1e-6, 1e-3]. With `max_probes` > 0,
/// only that many seeded-random coordinates are probed.
GradCheckResult grad_check(const ScalarFunction& f, const Tensor<double>& point, double h = 1e-6,
                           std::size_t max_probes = 0, std::uint64_t seed = 0);

struct GradCheckRow {
  std::string name;
  GradCheckResult result;

  bool passed() const { return result.max_rel_error < kGradCheckTolerance; }
};

/// Checks every differentiable primitive plus the 1/8-depth, 16x16-input network
/// (w.r.t. its input and a sample of every parameter tensor).
std::vector<GradCheckRow> run_gradcheck_suite(std::uint64_t seed);

}  // namespace fithand
