/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fithand/error.hpp"
#include "fithand/image.hpp"

namespace fs = std::filesystem;

namespace fithand {

namespace {

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::size_t checkpoint_size(const NetworkGraph& graph) {
  std::size_t bytes = 4 + 4 + 4 + serialize_config(graph.config()).size() + 4;
  for (const auto& p : graph.params()) bytes += 2 + p.name.size() + 1 + 4 * 4 + 4 * p.shape.size();
  return bytes + 4;
}

}  // namespace

AuditReport audit(const NetworkGraph& graph) {
  AuditReport report;
  report.config = graph.config();
  for (const auto& node : graph.nodes()) {
    AuditRow row{node.name, std::string(node_kind_name(node.kind)), node.output, 0};
    for (std::size_t i : node.params) row.params += graph.params()[i].shape.size();
    report.total += row.params;
    if (node.kind == NodeKind::dense) report.fc_params += row.params;
    report.rows.push_back(std::move(row));
  }
  report.checkpoint_bytes = checkpoint_size(graph);
  return report;
}

std::string format_audit(const AuditReport& r) {
  std::size_t width = 5;
  for (const auto& row : r.rows) width = std::max(width, row.layer.size());
  const int w = static_cast<int>(width);
  std::string out = format("%-*s  %-8s  %-16s  %10s\n", w, "layer", "kind", "output", "params");
  for (const auto& row : r.rows) {
    const std::string shape = format("%zux%zux%zu", row.output.c, row.output.h, row.output.w);
    out += format("%-*s  %-8s  %-16s  %10zu\n", w, row.layer.c_str(), row.kind.c_str(), shape.c_str(), row.params);
  }
  out += format("%-*s  %-8s  %-16s  %10zu\n", w, "total", "", "", r.total);
  out += "variant=" + std::string(variant_name(r.config.variant)) + "\n";
  out += format("classes=%zu\nchannels=%zu\ndepth_divisor=%zu\ninput_size=%zu\n", r.config.classes,
                r.config.in_channels, r.config.depth_divisor, r.config.input_size);
  out += format("total_params=%zu\n", r.total);
  out += format("fc_params=%zu\n", r.fc_params);
  out += format("checkpoint_bytes=%zu\n", r.checkpoint_bytes);
  const double share = r.total ? 100.0 * static_cast<double>(r.fc_params) / static_cast<double>(r.total) : 0.0;
  out += format(
      "note: the fc layer holds %.1f%% of all parameters and scales with the flattened feature size "
      "(%zu classes x final feature map); totals from other input sizes or pooling heads differ accordingly\n",
      share, r.config.classes);
  return out;
}

double reference_params_millions(VariantId v) {
  switch (v) {
    case VariantId::full: return 1.8;
    case VariantId::WImp: return 0.5;
    case VariantId::WDil: return 1.4;
    case VariantId::WL: return 1.8;
    case VariantId::Stack2: return 1.0;
    case VariantId::Stack4: return 3.4;
    case VariantId::Kul: return 1.8;
    case VariantId::Cat: return 1.6;
    case VariantId::CatSig: return 1.6;
    case VariantId::Avg: return 1.5;
    case VariantId::DpMed: return 1.6;
  }
  return 0.0;
}

std::vector<VariantRow> variant_comparison(std::size_t classes, std::size_t in_channels, std::size_t depth_divisor,
                                           std::size_t input_size) {
  std::vector<VariantRow> rows;
  for (VariantId v : all_variants()) {
    const auto graph = build_variant(v, classes, in_channels, depth_divisor, input_size);
    rows.push_back({v, graph.parameter_total(), reference_params_millions(v)});
  }
  return rows;
}

std::string format_variant_table(const std::vector<VariantRow>& rows) {
  std::string out = format("%-8s  %12s  %10s  %10s\n", "variant", "params", "params_M", "ref_M");
  for (const auto& r : rows) {
    out += format("%-8s  %12zu  %10.3f  %10.1f\n", std::string(variant_name(r.variant)).c_str(), r.params,
                  static_cast<double>(r.params) / 1e6, r.reference_millions);
  }
  return out;
}

std::vector<fs::path> dump_mean_activations(const Network<float>& net, const Tensor<float>& image,
                                            const fs::path& outdir) {
  if (image.shape().n != 1) throw ShapeError("activation dump expects a single image, got " + image.shape().str());
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create " + outdir.string() + ": " + ec.message());

  Tape<float> tape;
  tape.set_grad_enabled(false);
  const Var x = tape.leaf(image, false);
  const auto fwd = net.forward(tape, x);

  std::vector<fs::path> written;
  for (const auto& [name, var] : fwd.exported) {
    const Tensor<float>& act = tape.value(var);
    const Shape s = act.shape();
    std::vector<double> mean(s.plane(), 0.0);
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t i = 0; i < s.plane(); ++i) mean[i] += act[c * s.plane() + i];
    }
    for (auto& m : mean) m /= static_cast<double>(s.c);
    const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
    Image img(s.w, s.h, 1);
    for (std::size_t i = 0; i < s.plane(); ++i) {
      if (*hi - *lo <= 0.0) {
        img.pixels[i] = 128;
        continue;
      }
      img.pixels[i] = static_cast<std::uint8_t>(std::lround((mean[i] - *lo) / (*hi - *lo) * 255.0));
    }
    const fs::path path = outdir / (name + ".pgm");
    write_pnm(path, img);
    written.push_back(path);
  }
  return written;
}

}  // namespace fithand
