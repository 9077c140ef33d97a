/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fithand/network.hpp"

namespace fithand {

struct AuditRow {
  std::string layer;
  std::string kind;
  Shape output;  ///< per-sample
  std::size_t params = 0;
};

struct AuditReport {
  NetConfig config;
  std::vector<AuditRow> rows;
  std::size_t total = 0;
  std::size_t fc_params = 0;
  std::size_t checkpoint_bytes = 0;  ///< exact size of the saved file
};

AuditReport audit(const NetworkGraph& graph);

/// Per-layer table, then key=value totals and the FC geometry caveat.
std::string format_audit(const AuditReport& report);

/// Published parameter counts in millions, for side-by-side comparison.
double reference_params_millions(VariantId v);

struct VariantRow {
  VariantId variant;
  std::size_t params = 0;
  double reference_millions = 0.0;
};

std::vector<VariantRow> variant_comparison(std::size_t classes, std::size_t in_channels,
                                           std::size_t depth_divisor = 1, std::size_t input_size = 256);

std::string format_variant_table(const std::vector<VariantRow>& rows);

/// Channel-mean map of every exported stage for a (1, c, s, s) input, min-max
/// scaled to 8 bits (a constant map becomes 128) and written as <stage>.pgm.
/// Returns the written paths in graph order.
std::vector<std::filesystem::path> dump_mean_activations(const Network<float>& net, const Tensor<float>& image,
                                                         const std::filesystem::path& outdir);

}  // namespace fithand
