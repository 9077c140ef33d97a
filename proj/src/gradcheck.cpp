/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fithand/attention.hpp"
#include "fithand/finefeat.hpp"
#include "fithand/network.hpp"
#include "fithand/ops.hpp"

namespace fithand {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const ScalarFunction& f, const Tensor<double>& x) {
  Tape<double> tape;
  tape.set_grad_enabled(false);
  const Var out = f(tape, tape.leaf(x, false));
  const Tensor<double>& v = tape.value(out);
  if (v.size() != 1) throw ShapeError("grad_check function must return a scalar");
  return v[0];
}

std::vector<std::size_t> probe_indices(std::size_t size, std::size_t max_probes,
                                       std::uint64_t seed) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (max_probes == 0 || max_probes >= size) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < max_probes; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(max_probes);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

GradCheckResult grad_check(const ScalarFunction& f, const Tensor<double>& point, double h,
                           std::size_t max_probes, std::uint64_t seed) {
  if (!(h >= 1e-6 && h <= 1e-3)) throw ConfigError("grad_check step must lie in [1e-6, 1e-3]");

  Tape<double> tape;
  const Var x = tape.leaf(point);
  const Var y = f(tape, x);
  if (tape.value(y).size() != 1) throw ShapeError("grad_check function must return a scalar");
  if (!std::isfinite(tape.value(y)[0])) throw NumericError("function is not finite at the point");
  tape.backward(y);
  const Tensor<double> analytic = tape.has_grad(x) ? tape.grad(x) : Tensor<double>(point.shape());

  GradCheckResult result;
  Tensor<double> probe = point;
  for (std::size_t i : probe_indices(point.size(), max_probes, seed)) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = evaluate(f, probe);
    probe[i] = orig - h;
    const double down = evaluate(f, probe);
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("function is not finite at probe coordinate " + std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * h);
    const double err = relative_error(analytic[i], numeric);
    if (result.probes == 0 || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
      result.analytic = analytic[i];
      result.numeric = numeric;
    }
    ++result.probes;
  }
  return result;
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Tensor<double> random_tensor(Rng& rng, Shape s, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(s);
  for (auto& v : t.data()) v = uniform(rng, lo, hi);
  return t;
}

// sum(x * w) for a fixed random w, so every output element carries a distinct weight.
Var weighted_sum(Tape<double>& tape, Var x, const Tensor<double>& w) {
  const Tensor<double>& v = tape.value(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * w[i];
  return tape.record(Tensor<double>(Shape{}, acc), {x},
                     [x, w](Tape<double>& t, const Tensor<double>& g, Var) {
                       Tensor<double> gi = w;
                       for (auto& e : gi.data()) e *= g[0];
                       t.accumulate(x, gi);
                     });
}

// Random values whose three scale responses keep pairwise gaps above 1e-2.
std::array<Tensor<double>, 3> separated_triple(Rng& rng, Shape s) {
  std::array<Tensor<double>, 3> out{Tensor<double>(s), Tensor<double>(s), Tensor<double>(s)};
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::array<double, 3> v{};
    auto separated = [&v] {
      // Also keep clear of the median-branch switch b == (a + c) / 2.
      std::array<double, 3> s3 = v;
      std::sort(s3.begin(), s3.end());
      return s3[1] - s3[0] > 1e-2 && s3[2] - s3[1] > 1e-2 &&
             std::abs(s3[1] - 0.5 * (s3[0] + s3[2])) > 1e-2;
    };
    do {
      for (auto& e : v) e = uniform(rng, -2.0, 2.0);
    } while (!separated());
    out[0][i] = v[0];
    out[1][i] = v[1];
    out[2][i] = v[2];
  }
  return out;
}

GradCheckResult worst(GradCheckResult a, const GradCheckResult& b) {
  if (b.max_rel_error > a.max_rel_error) {
    GradCheckResult r = b;
    r.probes = a.probes + b.probes;
    return r;
  }
  a.probes += b.probes;
  return a;
}

}  // namespace

std::vector<GradCheckRow> run_gradcheck_suite(std::uint64_t seed) {
  Rng rng(seed);
  constexpr double h = 1e-5;
  std::vector<GradCheckRow> rows;

  // Convolutions: plain, strided and dilated, w.r.t. input, weights and bias.
  struct ConvCase {
    const char* name;
    ConvSpec spec;
  };
  ConvSpec plain = same_conv(2, 3, 3);
  ConvSpec strided = plain;
  strided.stride = 2;
  strided.pad = 1;
  ConvSpec dilated = same_conv(2, 3, 3, 2);
  for (const ConvCase& c : {ConvCase{"conv2d", plain}, ConvCase{"conv2d_stride2", strided},
                            ConvCase{"conv2d_dilated", dilated}}) {
    const Tensor<double> x = random_tensor(rng, Shape{2, 2, 7, 7});
    const Tensor<double> w = random_tensor(rng, conv_weight_shape(c.spec));
    const Tensor<double> b = random_tensor(rng, Shape{1, 1, 1, 3});
    Tensor<double> out;
    kernels::conv2d_forward(x, w, b.data(), c.spec, out);
    const Tensor<double> r = random_tensor(rng, out.shape());
    const ConvSpec spec = c.spec;
    GradCheckResult res = grad_check(
        [&](Tape<double>& t, Var v) {
          return weighted_sum(t, conv2d(t, v, t.leaf(w, false), t.leaf(b, false), spec), r);
        },
        x, h);
    res = worst(res, grad_check(
                         [&](Tape<double>& t, Var v) {
                           return weighted_sum(t, conv2d(t, t.leaf(x, false), v, t.leaf(b, false), spec), r);
                         },
                         w, h));
    res = worst(res, grad_check(
                         [&](Tape<double>& t, Var v) {
                           return weighted_sum(t, conv2d(t, t.leaf(x, false), t.leaf(w, false), v, spec), r);
                         },
                         b, h));
    rows.push_back({c.name, res});
  }

  {
    // Keep every element away from the kink at zero.
    Tensor<double> x = random_tensor(rng, Shape{2, 3, 4, 4});
    for (auto& v : x.data()) {
      if (std::abs(v) < 1e-2) v = 0.5;
    }
    const Tensor<double> r = random_tensor(rng, x.shape());
    rows.push_back({"relu", grad_check([&](Tape<double>& t, Var v) { return weighted_sum(t, relu(t, v), r); }, x, h)});
  }
  {
    const Tensor<double> x = random_tensor(rng, Shape{2, 3, 4, 4}, -3.0, 3.0);
    const Tensor<double> r = random_tensor(rng, x.shape());
    rows.push_back({"sigmoid", grad_check([&](Tape<double>& t, Var v) { return weighted_sum(t, sigmoid(t, v), r); }, x, h)});
  }
  {
    // Large alpha so the cross-channel term is exercised, not just the k^-beta scale.
    LrnParams params;
    params.alpha = 0.5;
    const Tensor<double> x = random_tensor(rng, Shape{2, 7, 3, 3}, -2.0, 2.0);
    const Tensor<double> r = random_tensor(rng, x.shape());
    GradCheckResult res = grad_check(
        [&](Tape<double>& t, Var v) { return weighted_sum(t, lrn(t, v, params), r); }, x, h);
    res = worst(res, grad_check([&](Tape<double>& t, Var v) { return weighted_sum(t, lrn(t, v, LrnParams{}), r); }, x, h));
    rows.push_back({"lrn", res});
  }
  {
    const Tensor<double> x = random_tensor(rng, Shape{3, 2, 3, 3});
    const Tensor<double> r = random_tensor(rng, x.shape());
    rows.push_back({"l2_normalize", grad_check([&](Tape<double>& t, Var v) { return weighted_sum(t, l2_normalize(t, v, 1e-12), r); }, x, h)});
  }
  {
    const Tensor<double> x = random_tensor(rng, Shape{3, 2, 2, 2});
    const Tensor<double> w = random_tensor(rng, Shape{1, 1, 8, 4});
    const Tensor<double> b = random_tensor(rng, Shape{1, 1, 1, 4});
    const Tensor<double> r = random_tensor(rng, Shape{3, 4, 1, 1});
    GradCheckResult res = grad_check(
        [&](Tape<double>& t, Var v) { return weighted_sum(t, dense(t, v, t.leaf(w, false), t.leaf(b, false)), r); }, x, h);
    res = worst(res, grad_check([&](Tape<double>& t, Var v) { return weighted_sum(t, dense(t, t.leaf(x, false), v, t.leaf(b, false)), r); }, w, h));
    res = worst(res, grad_check([&](Tape<double>& t, Var v) { return weighted_sum(t, dense(t, t.leaf(x, false), t.leaf(w, false), v), r); }, b, h));
    rows.push_back({"dense", res});
  }
  {
    const Tensor<double> z = random_tensor(rng, Shape{4, 5, 1, 1}, -3.0, 3.0);
    const std::vector<int> labels{0, 3, 4, 1};
    rows.push_back({"cross_entropy", grad_check([&](Tape<double>& t, Var v) { return loss(t, v, labels, LossKind::cross_entropy); }, z, h)});
    rows.push_back({"kl_divergence", grad_check([&](Tape<double>& t, Var v) { return loss(t, v, labels, LossKind::kl_divergence); }, z, h)});
  }
  {
    const Shape s{2, 3, 4, 4};
    const auto f = separated_triple(rng, s);
    const Tensor<double> r = random_tensor(rng, s);
    GradCheckResult res{};
    for (std::size_t which = 0; which < 3; ++which) {
      res = worst(res, grad_check(
                           [&](Tape<double>& t, Var v) {
                             std::array<Var, 3> in;
                             for (std::size_t i = 0; i < 3; ++i) in[i] = i == which ? v : t.leaf(f[i], false);
                             return weighted_sum(t, attention_fuse(t, in[0], in[1], in[2]), r);
                           },
                           f[which], h));
    }
    rows.push_back({"attention_fuse", res});

    GradCheckResult avg{};
    GradCheckResult med{};
    for (std::size_t which = 0; which < 3; ++which) {
      auto build = [&](bool median) {
        return [&, median](Tape<double>& t, Var v) {
          std::array<Var, 3> in;
          for (std::size_t i = 0; i < 3; ++i) in[i] = i == which ? v : t.leaf(f[i], false);
          return weighted_sum(t, median ? median3(t, in[0], in[1], in[2]) : mean3(t, in[0], in[1], in[2]), r);
        };
      };
      avg = worst(avg, grad_check(build(false), f[which], h));
      med = worst(med, grad_check(build(true), f[which], h));
    }
    rows.push_back({"average_fuse", avg});
    rows.push_back({"median_fuse", med});
  }
  {
    const Tensor<double> a = random_tensor(rng, Shape{2, 2, 3, 3});
    const Tensor<double> b = random_tensor(rng, Shape{2, 3, 3, 3});
    const Tensor<double> r = random_tensor(rng, Shape{2, 5, 3, 3});
    rows.push_back({"concat_channels", grad_check(
                                           [&](Tape<double>& t, Var v) {
                                             const std::array<Var, 2> parts{v, t.leaf(b, false)};
                                             return weighted_sum(t, concat_channels(t, std::span<const Var>(parts)), r);
                                           },
                                           a, h)});
  }

  // FineFeat blocks in every fusion mode, w.r.t. input.
  for (Fusion fusion : {Fusion::attention, Fusion::concat, Fusion::concat_sigmoid, Fusion::average,
                        Fusion::median}) {
    const FineFeatSpec spec{2, 3, fusion, true};
    std::vector<Tensor<double>> params;
    for (const ParamDesc& p : finefeat_params(spec)) params.push_back(random_tensor(rng, p.shape, -0.5, 0.5));
    const Tensor<double> x = random_tensor(rng, Shape{1, 2, 6, 6});
    const Tensor<double> r = random_tensor(rng, Shape{1, 3, 6, 6});
    rows.push_back({"finefeat_" + std::string(fusion_name(fusion)),
                    grad_check(
                        [&](Tape<double>& t, Var v) {
                          std::vector<Var> p;
                          for (const auto& pt : params) p.push_back(t.leaf(pt, false));
                          return weighted_sum(t, finefeat_forward(t, v, spec, std::span<const Var>(p)), r);
                        },
                        x, h)});
  }

  // Whole network: depth 1/8, 16x16 input, cross-entropy on a 2-sample batch.
  {
    Network<double> net(build_fithand(4, 3, 8, 16));
    net.initialize(seed + 1);
    // Non-zero biases so no activation sits exactly on a kink.
    for (std::size_t i = 0; i < net.params().size(); ++i) {
      if (net.graph().params()[i].is_bias) {
        for (auto& v : net.params()[i].data()) v = uniform(rng, -0.1, 0.1);
      }
    }
    const Tensor<double> image = random_tensor(rng, net.graph().input_shape(2), 0.0, 1.0);
    const std::vector<int> labels{1, 3};
    rows.push_back({"network_input", grad_check(
                                         [&](Tape<double>& t, Var v) {
                                           return loss(t, net.forward(t, v).logits, labels, LossKind::cross_entropy);
                                         },
                                         image, h)});
    GradCheckResult res{};
    for (std::size_t pi = 0; pi < net.params().size(); ++pi) {
      res = worst(res, grad_check(
                           [&](Tape<double>& t, Var v) {
                             std::vector<Var> ps;
                             for (std::size_t j = 0; j < net.params().size(); ++j) {
                               ps.push_back(j == pi ? v : t.leaf(net.params()[j], false));
                             }
                             const Var img = t.leaf(image, false);
                             return loss(t, net.forward(t, img, ps).logits, labels, LossKind::cross_entropy);
                           },
                           net.params()[pi], h, 24, seed + pi));
    }
    rows.push_back({"network_params", res});
  }
  return rows;
}

}  // namespace fithand
