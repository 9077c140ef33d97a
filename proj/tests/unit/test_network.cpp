/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "../support/param_oracle.hpp"
#include "fithand/audit.hpp"
#include "fithand/error.hpp"
#include "fithand/finefeat.hpp"
#include "fithand/image.hpp"
#include "fithand/network.hpp"

using namespace fithand;

namespace {

Tensor<double> random_tensor(Shape s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor<double> t(s);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

// Three identical centre one-hot kernels (zero-padded to each size) and zero biases.
std::vector<Tensor<double>> identity_params(const FineFeatSpec& spec) {
  std::vector<Tensor<double>> out;
  for (const auto& p : finefeat_params(spec)) {
    Tensor<double> t(p.shape);
    if (!p.is_bias && p.shape.h > 1) {
      const std::size_t mid = p.shape.h / 2;
      for (std::size_t c = 0; c < spec.depth; ++c) t.at(c, c, mid, mid) = 1.0;
    }
    out.push_back(std::move(t));
  }
  return out;
}

Tensor<double> run_finefeat(const FineFeatSpec& spec, const Tensor<double>& x,
                            const std::vector<Tensor<double>>& params) {
  Tape<double> tape;
  std::vector<Var> vars;
  for (const auto& p : params) vars.push_back(tape.leaf(p));
  return tape.value(finefeat_forward(tape, tape.leaf(x), spec, vars));
}

}  // namespace

TEST(FineFeat, ParamCounts) {
  EXPECT_EQ(finefeat_param_count({32, 32, Fusion::attention}), 85088u);
  EXPECT_EQ(finefeat_param_count({64, 96, Fusion::attention}), 510240u);
  for (Fusion f : {Fusion::attention, Fusion::concat, Fusion::concat_sigmoid, Fusion::average, Fusion::median}) {
    const FineFeatSpec spec{16, 8, f};
    std::size_t brute = 0;
    for (const auto& p : finefeat_params(spec)) brute += p.shape.size();
    EXPECT_EQ(finefeat_param_count(spec), brute);
    const bool concat = f == Fusion::concat || f == Fusion::concat_sigmoid;
    EXPECT_EQ(brute, oracle::finefeat(16, 8, concat));
  }
  EXPECT_THROW((FineFeatSpec{4, 0, Fusion::attention}.validate()), ConfigError);
}

TEST(FineFeat, EqualKernelsReturnCommonResponse) {
  const auto x = random_tensor(Shape{2, 3, 6, 6}, 1);
  for (Fusion f : {Fusion::attention, Fusion::average, Fusion::median}) {
    const FineFeatSpec spec{3, 3, f};
    const auto y = run_finefeat(spec, x, identity_params(spec));
    ASSERT_EQ(y.shape(), x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-14) << fusion_name(f);
  }
}

TEST(FineFeat, FusionModesAtOnePosition) {
  // 1x1 input: only the centre taps matter, so biases set the three responses.
  auto responses = [](Fusion f, double a, double b, double c) {
    const FineFeatSpec spec{1, 1, f};
    std::vector<Tensor<double>> params;
    const double bias[3] = {a, b, c};
    std::size_t branch = 0;
    for (const auto& p : finefeat_params(spec)) {
      Tensor<double> t(p.shape);
      if (p.is_bias && branch < 3) t[0] = bias[branch++];
      params.push_back(std::move(t));
    }
    return run_finefeat(spec, Tensor<double>(Shape{1, 1, 1, 1}), params)[0];
  };
  EXPECT_DOUBLE_EQ(responses(Fusion::average, 1, 2, 3), 2.0);
  EXPECT_DOUBLE_EQ(responses(Fusion::median, 1, 1, 4), 1.0);
  EXPECT_DOUBLE_EQ(responses(Fusion::attention, 1, 1, 4), 4.0);
}

TEST(FineFeat, OutputKeepsSpatialSize) {
  const auto x = random_tensor(Shape{1, 2, 9, 7}, 5);
  for (Fusion f : {Fusion::attention, Fusion::concat, Fusion::concat_sigmoid, Fusion::average, Fusion::median}) {
    const FineFeatSpec spec{2, 4, f};
    std::vector<Tensor<double>> params;
    std::uint64_t seed = 10;
    for (const auto& p : finefeat_params(spec)) params.push_back(random_tensor(p.shape, seed++));
    EXPECT_EQ(run_finefeat(spec, x, params).shape(), (Shape{1, 4, 9, 7}));
  }
}

TEST(FineFeat, ChannelMismatch) {
  const FineFeatSpec spec{3, 2, Fusion::attention};
  EXPECT_THROW(run_finefeat(spec, Tensor<double>(Shape{1, 2, 5, 5}), identity_params(spec)), ShapeError);
}

TEST(Network, FullBuildStructure) {
  const auto g = build_fithand(10, 3);
  EXPECT_EQ(g.attention_nodes(), 3u);
  EXPECT_EQ(g.dilated_nodes(), 3u);
  EXPECT_EQ(g.parameter_total(), oracle::total("full", 10, 3));
  EXPECT_EQ(g.parameter_total(), 2280234u);
  std::map<std::string, Shape> shapes;
  for (const auto& n : g.nodes()) shapes[n.name] = n.output;
  EXPECT_EQ(shapes["stem1"], (Shape{1, 32, 128, 128}));
  EXPECT_EQ(shapes["stem2"], (Shape{1, 32, 64, 64}));
  EXPECT_EQ(shapes["stage1"], (Shape{1, 32, 64, 64}));
  EXPECT_EQ(shapes["stage2"], (Shape{1, 64, 64, 64}));
  EXPECT_EQ(shapes["stage3"], (Shape{1, 96, 64, 64}));
  EXPECT_EQ(shapes["final"], (Shape{1, 128, 32, 32}));
  EXPECT_EQ(shapes["fc"], (Shape{1, 10, 1, 1}));
  for (const auto& n : g.nodes()) {
    if (n.kind != NodeKind::add) continue;
    EXPECT_EQ(g.nodes()[static_cast<std::size_t>(n.inputs[0])].output,
              g.nodes()[static_cast<std::size_t>(n.inputs[1])].output);
  }
}

TEST(Network, ParameterTotalsMatchOracleForEveryVariant) {
  for (VariantId v : all_variants()) {
    for (std::size_t div : {1u, 2u, 4u, 8u}) {
      const auto g = build_variant(v, 7, 1, div, 64);
      std::size_t brute = 0;
      for (const auto& p : g.params()) brute += p.shape.size();
      EXPECT_EQ(g.parameter_total(), brute);
      EXPECT_EQ(brute, oracle::total(std::string(variant_name(v)), 7, 1, div, 64)) << variant_name(v);
    }
  }
}

TEST(Network, VariantOrderingAndStructure) {
  auto total = [](VariantId v) { return build_variant(v, 10, 3).parameter_total(); };
  EXPECT_LT(total(VariantId::WImp), total(VariantId::Stack2));
  EXPECT_LT(total(VariantId::Stack2), total(VariantId::WDil));
  EXPECT_LT(total(VariantId::WDil), total(VariantId::full));
  EXPECT_LT(total(VariantId::full), total(VariantId::Stack4));
  EXPECT_EQ(total(VariantId::Kul), total(VariantId::full));
  EXPECT_EQ(build_variant(VariantId::Stack2, 10, 3).attention_nodes(), 2u);
  EXPECT_EQ(build_variant(VariantId::WImp, 10, 3).attention_nodes(), 0u);
  EXPECT_EQ(build_variant(VariantId::WDil, 10, 3).dilated_nodes(), 0u);
  EXPECT_EQ(build_variant(VariantId::WL, 10, 3).count(NodeKind::l2_normalize), 0u);
  EXPECT_EQ(variant_loss(VariantId::Kul), LossKind::kl_divergence);
  EXPECT_EQ(variant_loss(VariantId::full), LossKind::cross_entropy);
  EXPECT_EQ(parse_variant("stack4"), VariantId::Stack4);
  EXPECT_THROW(parse_variant("nope"), ConfigError);
}

TEST(Network, ShapeSoundnessAcrossSizes) {
  for (VariantId v : all_variants()) {
    for (std::size_t side : {32u, 40u, 64u, 96u}) {
      EXPECT_NO_THROW(build_variant(v, 3, 3, 8, side)) << variant_name(v) << " " << side;
    }
  }
}

TEST(Network, InvalidConfig) {
  EXPECT_THROW(build_fithand(10, 3, 3), ConfigError);
  EXPECT_THROW(build_fithand(1, 3), ConfigError);
  EXPECT_THROW(build_fithand(10, 2), ConfigError);
}

TEST(Network, ConfigRoundTrip) {
  NetConfig c;
  c.variant = VariantId::CatSig;
  c.classes = 5;
  c.in_channels = 1;
  c.depth_divisor = 4;
  c.input_size = 48;
  c.lrn.alpha = 0.123456789012345678;
  const NetConfig back = parse_config(serialize_config(c));
  EXPECT_EQ(serialize_config(back), serialize_config(c));
  EXPECT_EQ(back.lrn.alpha, c.lrn.alpha);
}

TEST(Network, ForwardLogitShapeAndSeededInit) {
  Network<float> a(build_fithand(4, 1, 8, 32));
  Network<float> b(build_fithand(4, 1, 8, 32));
  a.initialize(3);
  b.initialize(3);
  for (std::size_t i = 0; i < a.params().size(); ++i) EXPECT_EQ(a.params()[i].storage(), b.params()[i].storage());
  const auto logits = a.predict(Tensor<float>(Shape{2, 1, 32, 32}, 0.5f));
  EXPECT_EQ(logits.shape(), (Shape{2, 4, 1, 1}));
  EXPECT_TRUE(logits.all_finite());
}

TEST(Audit, StemRowAndTotals) {
  const auto report = audit(build_fithand(10, 3));
  ASSERT_FALSE(report.rows.empty());
  EXPECT_EQ(report.rows[0].layer, "stem1");
  EXPECT_EQ(report.rows[0].params, 896u);
  EXPECT_EQ(report.total, 2280234u);
  EXPECT_EQ(report.fc_params, 128u * 32 * 32 * 10 + 10);
  EXPECT_GT(report.checkpoint_bytes, 4 * report.total);
  const std::string text = format_audit(report);
  EXPECT_NE(text.find("total_params=2280234"), std::string::npos);
  EXPECT_NE(text.find("note: the fc layer"), std::string::npos);
}

TEST(Activations, SixStageMapsWithStageDims) {
  Network<float> net(build_fithand(3, 1, 8, 32));
  net.initialize(1);
  const auto dir = std::filesystem::temp_directory_path() / "fithand_act_test";
  std::filesystem::remove_all(dir);
  const auto files = dump_mean_activations(net, Tensor<float>(Shape{1, 1, 32, 32}, 0.3f), dir);
  ASSERT_EQ(files.size(), 6u);
  EXPECT_EQ(files.front().filename(), "stem1.pgm");
  EXPECT_EQ(read_image(files.front()).width, 16u);
  EXPECT_EQ(read_image(files.back()).width, 4u);
  std::filesystem::remove_all(dir);
}

TEST(Activations, ConstantMapIsMidGray) {
  // Zero weights make every stage output constant.
  Network<float> net(build_fithand(3, 1, 8, 32));
  const auto dir = std::filesystem::temp_directory_path() / "fithand_act_const";
  std::filesystem::remove_all(dir);
  for (const auto& f : dump_mean_activations(net, Tensor<float>(Shape{1, 1, 32, 32}, 0.7f), dir)) {
    const Image img = read_image(f);
    for (auto v : img.pixels) EXPECT_EQ(v, 128);
  }
  std::filesystem::remove_all(dir);
}
