/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <string>

#include "fithand/tensor.hpp"

namespace fithand {

/// Name, dimensions and initialization fan-in of one learnable tensor.
struct ParamDesc {
  std::string name;
  Shape shape;
  std::size_t fan_in = 1;
  bool is_bias = false;
};

}  // namespace fithand
