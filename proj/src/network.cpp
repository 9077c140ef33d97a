/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/network.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "fithand/attention.hpp"

namespace fithand {

namespace {

constexpr std::array<VariantId, 11> kVariants{
    VariantId::full,   VariantId::WImp, VariantId::WDil,   VariantId::WL,
    VariantId::Stack2, VariantId::Stack4, VariantId::Kul,  VariantId::Cat,
    VariantId::CatSig, VariantId::Avg,  VariantId::DpMed};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view variant_name(VariantId v) {
  switch (v) {
    case VariantId::full: return "full";
    case VariantId::WImp: return "WImp";
    case VariantId::WDil: return "WDil";
    case VariantId::WL: return "WL";
    case VariantId::Stack2: return "Stack2";
    case VariantId::Stack4: return "Stack4";
    case VariantId::Kul: return "Kul";
    case VariantId::Cat: return "Cat";
    case VariantId::CatSig: return "CatSig";
    case VariantId::Avg: return "Avg";
    case VariantId::DpMed: return "DpMed";
  }
  return "?";
}

VariantId parse_variant(std::string_view name) {
  const std::string key = lower(name);
  for (VariantId v : kVariants) {
    if (lower(variant_name(v)) == key) return v;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

const std::array<VariantId, 11>& all_variants() { return kVariants; }

LossKind variant_loss(VariantId v) {
  return v == VariantId::Kul ? LossKind::kl_divergence : LossKind::cross_entropy;
}

void NetConfig::validate() const {
  if (classes < 2) throw ConfigError("at least 2 classes are required");
  if (in_channels != 1 && in_channels != 3) throw ConfigError("input channels must be 1 or 3");
  if (depth_divisor != 1 && depth_divisor != 2 && depth_divisor != 4 && depth_divisor != 8) {
    throw ConfigError("depth scale divisor must be 1, 2, 4 or 8, got " +
                      std::to_string(depth_divisor));
  }
  if (input_size == 0) throw ConfigError("input size must be positive");
  if (!(lrn.k > 0.0)) throw ConfigError("LRN k must be positive");
  if (lrn.size == 0 || lrn.size % 2 == 0) throw ConfigError("LRN window must be odd");
  if (!(l2_epsilon > 0.0)) throw ConfigError("L2 epsilon must be positive");
}

std::string serialize_config(const NetConfig& c) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "variant=" << variant_name(c.variant) << '\n'
     << "classes=" << c.classes << '\n'
     << "channels=" << c.in_channels << '\n'
     << "depth_divisor=" << c.depth_divisor << '\n'
     << "input_size=" << c.input_size << '\n'
     << "lrn_k=" << num(c.lrn.k) << '\n'
     << "lrn_size=" << c.lrn.size << '\n'
     << "lrn_alpha=" << num(c.lrn.alpha) << '\n'
     << "lrn_beta=" << num(c.lrn.beta) << '\n'
     << "activations=" << (c.activations ? 1 : 0) << '\n'
     << "l2_epsilon=" << num(c.l2_epsilon) << '\n';
  return os.str();
}

NetConfig parse_config(std::string_view text) {
  NetConfig c;
  std::istringstream is{std::string(text)};
  std::string line;
  auto to_size = [](const std::string& key, const std::string& v) {
    std::size_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
      throw ConfigError("bad integer for '" + key + "': " + v);
    }
    return out;
  };
  auto to_double = [](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double out = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("bad number for '" + key + "': " + v);
    }
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "variant") c.variant = parse_variant(val);
    else if (key == "classes") c.classes = to_size(key, val);
    else if (key == "channels") c.in_channels = to_size(key, val);
    else if (key == "depth_divisor") c.depth_divisor = to_size(key, val);
    else if (key == "input_size") c.input_size = to_size(key, val);
    else if (key == "lrn_k") c.lrn.k = to_double(key, val);
    else if (key == "lrn_size") c.lrn.size = to_size(key, val);
    else if (key == "lrn_alpha") c.lrn.alpha = to_double(key, val);
    else if (key == "lrn_beta") c.lrn.beta = to_double(key, val);
    else if (key == "activations") c.activations = to_size(key, val) != 0;
    else if (key == "l2_epsilon") c.l2_epsilon = to_double(key, val);
    else throw ConfigError("unknown network config key '" + key + "'");
  }
  c.validate();
  return c;
}

std::string_view node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::conv: return "conv";
    case NodeKind::finefeat: return "finefeat";
    case NodeKind::add: return "add";
    case NodeKind::lrn: return "lrn";
    case NodeKind::l2_normalize: return "l2norm";
    case NodeKind::dense: return "dense";
  }
  return "?";
}

std::size_t NetworkGraph::count(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [kind](const GraphNode& n) { return n.kind == kind; }));
}

std::size_t NetworkGraph::attention_nodes() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const GraphNode& n) {
    return n.kind == NodeKind::finefeat && n.finefeat.fusion == Fusion::attention;
  }));
}

std::size_t NetworkGraph::dilated_nodes() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const GraphNode& n) {
    return n.kind == NodeKind::conv && n.conv.dilation > 1;
  }));
}

std::size_t NetworkGraph::parameter_total() const {
  std::size_t total = 0;
  for (const ParamDesc& p : params_) total += p.shape.size();
  return total;
}

Shape NetworkGraph::input_shape(std::size_t batch) const {
  return Shape{batch, config_.in_channels, config_.input_size, config_.input_size};
}

class GraphBuilder {
 public:
  explicit GraphBuilder(const NetConfig& config) { graph_.config_ = config; }

  int conv(const std::string& name, int input, const ConvSpec& spec, bool relu, bool exported) {
    GraphNode node;
    node.name = name;
    node.kind = NodeKind::conv;
    node.inputs = {input};
    node.conv = spec;
    node.relu = relu;
    node.exported = exported;
    const Shape in = shape_of(input);
    node.output = conv_output_shape(in, conv_weight_shape(spec), spec);
    const std::size_t fan_in = spec.in_channels * spec.kernel * spec.kernel;
    node.params.push_back(add_param(name + ".weight", conv_weight_shape(spec), fan_in, false));
    if (spec.has_bias) {
      node.params.push_back(add_param(name + ".bias", Shape{1, 1, 1, spec.out_channels}, fan_in, true));
    }
    return push(std::move(node));
  }

  int finefeat(const std::string& name, int input, const FineFeatSpec& spec) {
    GraphNode node;
    node.name = name;
    node.kind = NodeKind::finefeat;
    node.inputs = {input};
    node.finefeat = spec;
    const Shape in = shape_of(input);
    if (in.c != spec.in_channels) throw ShapeError(name + ": channel mismatch");
    node.output = Shape{1, spec.depth, in.h, in.w};
    for (const ParamDesc& p : finefeat_params(spec)) {
      node.params.push_back(add_param(name + "." + p.name, p.shape, p.fan_in, p.is_bias));
    }
    return push(std::move(node));
  }

  int add(const std::string& name, int a, int b) {
    const Shape sa = shape_of(a);
    const Shape sb = shape_of(b);
    if (sa != sb) {
      throw ShapeError(name + ": integration operands differ " + sa.str() + " vs " + sb.str());
    }
    GraphNode node;
    node.name = name;
    node.kind = NodeKind::add;
    node.inputs = {a, b};
    node.output = sa;
    return push(std::move(node));
  }

  int unary(const std::string& name, NodeKind kind, int input, bool exported = false) {
    GraphNode node;
    node.name = name;
    node.kind = kind;
    node.inputs = {input};
    node.exported = exported;
    node.output = shape_of(input);
    return push(std::move(node));
  }

  int dense(const std::string& name, int input, std::size_t classes) {
    const std::size_t features = shape_of(input).sample_size();
    GraphNode node;
    node.name = name;
    node.kind = NodeKind::dense;
    node.inputs = {input};
    node.output = Shape{1, classes, 1, 1};
    node.params.push_back(add_param(name + ".weight", Shape{1, 1, features, classes}, features, false));
    node.params.push_back(add_param(name + ".bias", Shape{1, 1, 1, classes}, features, true));
    return push(std::move(node));
  }

  Shape shape_of(int node) const {
    if (node == GraphNode::kImage) return graph_.input_shape(1);
    return graph_.nodes_.at(static_cast<std::size_t>(node)).output;
  }

  NetworkGraph finish() { return std::move(graph_); }

 private:
  std::size_t add_param(std::string name, Shape shape, std::size_t fan_in, bool is_bias) {
    graph_.params_.push_back(ParamDesc{std::move(name), shape, fan_in, is_bias});
    return graph_.params_.size() - 1;
  }

  int push(GraphNode node) {
    graph_.nodes_.push_back(std::move(node));
    return static_cast<int>(graph_.nodes_.size() - 1);
  }

  NetworkGraph graph_;
};

NetworkGraph build_network(const NetConfig& config) {
  config.validate();
  const VariantId v = config.variant;
  const std::size_t div = config.depth_divisor;
  const bool act = config.activations;

  std::vector<std::size_t> depths{32, 64, 96};
  if (v == VariantId::Stack2) depths = {32, 64};
  if (v == VariantId::Stack4) depths = {32, 64, 96, 128};
  for (auto& d : depths) d /= div;

  Fusion fusion = Fusion::attention;
  if (v == VariantId::Cat) fusion = Fusion::concat;
  if (v == VariantId::CatSig) fusion = Fusion::concat_sigmoid;
  if (v == VariantId::Avg) fusion = Fusion::average;
  if (v == VariantId::DpMed) fusion = Fusion::median;

  const bool use_finefeat = v != VariantId::WImp;
  const bool use_dilated = v != VariantId::WDil;

  GraphBuilder b(config);
  const std::size_t stem_depth = 32 / div;
  auto strided = [](std::size_t in, std::size_t out) {
    ConvSpec s;
    s.kernel = 3;
    s.stride = 2;
    s.pad = 1;
    s.in_channels = in;
    s.out_channels = out;
    return s;
  };

  int x = b.conv("stem1", GraphNode::kImage, strided(config.in_channels, stem_depth), act, true);
  x = b.conv("stem2", x, strided(stem_depth, stem_depth), act, true);

  std::size_t channels = stem_depth;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    const std::string stage = "stage" + std::to_string(i + 1);
    int ff = -2;
    int dil = -2;
    if (use_finefeat) {
      FineFeatSpec spec{channels, depths[i], fusion, act};
      ff = b.finefeat(stage + ".finefeat", x, spec);
    }
    if (use_dilated) {
      dil = b.conv(stage + ".dilated", x, same_conv(channels, depths[i], 3, 2), act, false);
    }
    int merged = ff;
    if (use_finefeat && use_dilated) merged = b.add(stage + ".add", ff, dil);
    else if (!use_finefeat) merged = dil;
    x = b.unary(stage, NodeKind::lrn, merged, true);
    channels = depths[i];
  }

  x = b.conv("final", x, strided(channels, 128 / div), act, true);
  if (v != VariantId::WL) x = b.unary("l2norm", NodeKind::l2_normalize, x);
  b.dense("fc", x, config.classes);
  return b.finish();
}

NetworkGraph build_fithand(std::size_t classes, std::size_t in_channels, std::size_t depth_divisor,
                           std::size_t input_size) {
  return build_variant(VariantId::full, classes, in_channels, depth_divisor, input_size);
}

NetworkGraph build_variant(VariantId v, std::size_t classes, std::size_t in_channels,
                           std::size_t depth_divisor, std::size_t input_size) {
  NetConfig config;
  config.variant = v;
  config.classes = classes;
  config.in_channels = in_channels;
  config.depth_divisor = depth_divisor;
  config.input_size = input_size;
  return build_network(config);
}

template <typename T>
Network<T>::Network(NetworkGraph graph) : graph_(std::move(graph)) {
  params_.reserve(graph_.params().size());
  for (const ParamDesc& p : graph_.params()) params_.emplace_back(p.shape);
}

template <typename T>
void Network<T>::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const ParamDesc& desc = graph_.params()[i];
    if (desc.is_bias) {
      params_[i].fill(T{0});
      continue;
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(desc.fan_in));
    for (auto& v : params_[i].data()) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
      v = static_cast<T>((2.0 * u - 1.0) * bound);
    }
  }
}

template <typename T>
typename Network<T>::Forward Network<T>::forward(Tape<T>& tape, Var image) const {
  const Shape in = tape.value(image).shape();
  const Shape expected = graph_.input_shape(in.n);
  if (in != expected) {
    throw ShapeError("network input is " + in.str() + ", expected " + expected.str());
  }
  std::vector<Var> leaves;
  leaves.reserve(params_.size());
  for (const Tensor<T>& p : params_) leaves.push_back(tape.leaf(p));
  return forward(tape, image, leaves);
}

template <typename T>
typename Network<T>::Forward Network<T>::forward(Tape<T>& tape, Var image,
                                                 std::span<const Var> params) const {
  const Shape in = tape.value(image).shape();
  const Shape expected = graph_.input_shape(in.n);
  if (in != expected) {
    throw ShapeError("network input is " + in.str() + ", expected " + expected.str());
  }
  if (params.size() != params_.size()) {
    throw ShapeError("network expects " + std::to_string(params_.size()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  Forward result;
  result.params.assign(params.begin(), params.end());

  const NetConfig& cfg = graph_.config();
  std::vector<Var> values(graph_.nodes().size());
  auto input_of = [&](int idx) { return idx == GraphNode::kImage ? image : values[static_cast<std::size_t>(idx)]; };

  for (std::size_t i = 0; i < graph_.nodes().size(); ++i) {
    const GraphNode& node = graph_.nodes()[i];
    std::vector<Var> p;
    for (std::size_t pi : node.params) p.push_back(result.params[pi]);
    Var out;
    switch (node.kind) {
      case NodeKind::conv: {
        std::optional<Var> bias;
        if (node.conv.has_bias) bias = p[1];
        out = conv2d(tape, input_of(node.inputs[0]), p[0], bias, node.conv);
        if (node.relu) out = relu(tape, out);
        break;
      }
      case NodeKind::finefeat:
        out = finefeat_forward(tape, input_of(node.inputs[0]), node.finefeat, std::span<const Var>(p));
        break;
      case NodeKind::add:
        out = add(tape, input_of(node.inputs[0]), input_of(node.inputs[1]));
        break;
      case NodeKind::lrn:
        out = lrn(tape, input_of(node.inputs[0]), cfg.lrn);
        break;
      case NodeKind::l2_normalize:
        out = l2_normalize(tape, input_of(node.inputs[0]), cfg.l2_epsilon);
        break;
      case NodeKind::dense:
        out = dense(tape, input_of(node.inputs[0]), p[0], p[1]);
        break;
    }
    values[i] = out;
    if (node.exported) result.exported.emplace_back(node.name, out);
  }
  result.logits = values.back();
  return result;
}

template <typename T>
Tensor<T> Network<T>::predict(const Tensor<T>& batch) const {
  Tape<T> tape;
  tape.set_grad_enabled(false);
  const Var image = tape.leaf(batch, false);
  return tape.value(forward(tape, image).logits);
}

template class Network<float>;
template class Network<double>;

}  // namespace fithand
