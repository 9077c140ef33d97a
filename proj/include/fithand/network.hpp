/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fithand/finefeat.hpp"
#include "fithand/ops.hpp"
#include "fithand/param.hpp"

namespace fithand {

/// The full network and its ablation variants.
enum class VariantId { full, WImp, WDil, WL, Stack2, Stack4, Kul, Cat, CatSig, Avg, DpMed };

std::string_view variant_name(VariantId v);
/// Case-insensitive; throws ConfigError for unknown names.
VariantId parse_variant(std::string_view name);
const std::array<VariantId, 11>& all_variants();

/// Training loss implied by a variant (Kul trains with KL divergence).
LossKind variant_loss(VariantId v);

struct NetConfig {
  VariantId variant = VariantId::full;
  std::size_t classes = 10;
  std::size_t in_channels = 3;
  std::size_t depth_divisor = 1;  ///< 1, 2, 4 or 8; divides every stage depth
  std::size_t input_size = 256;
  LrnParams lrn{};
  bool activations = true;  ///< ReLU after the stem, dilated, final and projection convs
  double l2_epsilon = 1e-12;

  void validate() const;
};

/// key=value lines, one per field, in a fixed order.
std::string serialize_config(const NetConfig& config);
NetConfig parse_config(std::string_view text);

enum class NodeKind { conv, finefeat, add, lrn, l2_normalize, dense };

std::string_view node_kind_name(NodeKind k);

struct GraphNode {
  static constexpr int kImage = -1;

  std::string name;
  NodeKind kind = NodeKind::conv;
  std::vector<int> inputs;  ///< earlier node indices, or kImage
  ConvSpec conv{};
  FineFeatSpec finefeat{};
  bool relu = false;
  std::vector<std::size_t> params;  ///< indices into NetworkGraph::params()
  bool exported = false;            ///< stage output written by activation dumps
  Shape output{};                   ///< per-sample output dims (n = 1)
};

/// Ordered layer list with skip/merge edges, plus the parameter layout.
class NetworkGraph {
 public:
  const NetConfig& config() const noexcept { return config_; }
  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  const std::vector<ParamDesc>& params() const noexcept { return params_; }

  std::size_t count(NodeKind kind) const;
  std::size_t attention_nodes() const;
  std::size_t dilated_nodes() const;
  std::size_t parameter_total() const;
  Shape input_shape(std::size_t batch = 1) const;

 private:
  friend class GraphBuilder;

  NetConfig config_;
  std::vector<GraphNode> nodes_;
  std::vector<ParamDesc> params_;
};

NetworkGraph build_network(const NetConfig& config);

/// Default three-stage network; `depth_divisor` in {1, 2, 4, 8}.
NetworkGraph build_fithand(std::size_t classes, std::size_t in_channels,
                           std::size_t depth_divisor = 1, std::size_t input_size = 256);

NetworkGraph build_variant(VariantId v, std::size_t classes, std::size_t in_channels,
                           std::size_t depth_divisor = 1, std::size_t input_size = 256);

/// A graph together with its parameter values.
template <typename T>
class Network {
 public:
  struct Forward {
    Var logits;
    std::vector<Var> params;  ///< tape leaves, aligned with graph().params()
    std::vector<std::pair<std::string, Var>> exported;
  };

  explicit Network(NetworkGraph graph);

  /// He-style uniform weights U(-sqrt(6/fan_in), +sqrt(6/fan_in)), zero biases.
  void initialize(std::uint64_t seed);

  const NetworkGraph& graph() const noexcept { return graph_; }
  const NetConfig& config() const noexcept { return graph_.config(); }
  std::vector<Tensor<T>>& params() noexcept { return params_; }
  const std::vector<Tensor<T>>& params() const noexcept { return params_; }

  /// Records the whole graph on `tape`; `image` must be (n, in_channels, s, s).
  Forward forward(Tape<T>& tape, Var image) const;

  /// As above, reading parameters from caller-supplied tape values.
  Forward forward(Tape<T>& tape, Var image, std::span<const Var> params) const;

  /// Logits for a batch without keeping gradients.
  Tensor<T> predict(const Tensor<T>& batch) const;

  template <typename U>
  Network<U> cast() const {
    Network<U> out(graph_);
    for (std::size_t i = 0; i < params_.size(); ++i) out.params()[i] = params_[i].template cast<U>();
    return out;
  }

 private:
  NetworkGraph graph_;
  std::vector<Tensor<T>> params_;
};

}  // namespace fithand
