/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/finefeat.hpp"

#include <algorithm>

#include "fithand/attention.hpp"
#include "fithand/ops.hpp"

namespace fithand {

std::string_view fusion_name(Fusion f) {
  switch (f) {
    case Fusion::attention: return "attention";
    case Fusion::concat: return "concat";
    case Fusion::concat_sigmoid: return "concat_sigmoid";
    case Fusion::average: return "average";
    case Fusion::median: return "median";
  }
  return "?";
}

void FineFeatSpec::validate() const {
  if (in_channels == 0) throw ConfigError("FineFeat input channels must be positive");
  if (depth == 0) throw ConfigError("FineFeat depth must be positive");
}

namespace {

bool is_concat(Fusion f) { return f == Fusion::concat || f == Fusion::concat_sigmoid; }

ConvSpec projection_conv(const FineFeatSpec& spec) {
  return same_conv(3 * spec.depth, spec.depth, 1);
}

}  // namespace

ConvSpec finefeat_conv(const FineFeatSpec& spec, std::size_t kernel) {
  return same_conv(spec.in_channels, spec.depth, kernel);
}

std::vector<ParamDesc> finefeat_params(const FineFeatSpec& spec) {
  spec.validate();
  std::vector<ParamDesc> out;
  auto push_conv = [&out](const std::string& prefix, const ConvSpec& conv) {
    const std::size_t fan_in = conv.in_channels * conv.kernel * conv.kernel;
    out.push_back({prefix + ".weight", conv_weight_shape(conv), fan_in, false});
    out.push_back({prefix + ".bias", Shape{1, 1, 1, conv.out_channels}, fan_in, true});
  };
  for (std::size_t k : kFineFeatKernels) {
    push_conv("k" + std::to_string(k), finefeat_conv(spec, k));
  }
  if (is_concat(spec.fusion)) push_conv("proj", projection_conv(spec));
  return out;
}

std::size_t finefeat_param_count(const FineFeatSpec& spec) {
  spec.validate();
  std::size_t total = 0;
  for (std::size_t k : kFineFeatKernels) total += conv_param_count(finefeat_conv(spec, k));
  if (is_concat(spec.fusion)) total += conv_param_count(projection_conv(spec));
  return total;
}

template <typename T>
Var mean3(Tape<T>& tape, Var a, Var b, Var c) {
  const Tensor<T>& va = tape.value(a);
  const Tensor<T>& vb = tape.value(b);
  const Tensor<T>& vc = tape.value(c);
  if (va.shape() != vb.shape() || va.shape() != vc.shape()) {
    throw ShapeError("average fusion inputs differ in shape");
  }
  Tensor<T> out(va.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (va[i] + vb[i] + vc[i]) / T{3};
  return tape.record(std::move(out), {a, b, c}, [a, b, c](Tape<T>& t, const Tensor<T>& g, Var) {
    Tensor<T> gi = g;
    for (auto& v : gi.data()) v /= T{3};
    t.accumulate(a, gi);
    t.accumulate(b, gi);
    t.accumulate(c, gi);
  });
}

namespace {

template <typename T>
std::size_t median_index(T a, T b, T c) {
  std::array<std::size_t, 3> idx{0, 1, 2};
  const std::array<T, 3> v{a, b, c};
  std::stable_sort(idx.begin(), idx.end(), [&v](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  return idx[1];
}

}  // namespace

template <typename T>
Var median3(Tape<T>& tape, Var a, Var b, Var c) {
  const Tensor<T>& va = tape.value(a);
  const Tensor<T>& vb = tape.value(b);
  const Tensor<T>& vc = tape.value(c);
  if (va.shape() != vb.shape() || va.shape() != vc.shape()) {
    throw ShapeError("median fusion inputs differ in shape");
  }
  Tensor<T> out(va.shape());
  std::vector<unsigned char> pick(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t m = median_index(va[i], vb[i], vc[i]);
    pick[i] = static_cast<unsigned char>(m);
    out[i] = m == 0 ? va[i] : (m == 1 ? vb[i] : vc[i]);
  }
  return tape.record(std::move(out), {a, b, c},
                     [a, b, c, pick = std::move(pick)](Tape<T>& t, const Tensor<T>& g, Var) {
                       std::array<Tensor<T>, 3> grads{Tensor<T>(g.shape()), Tensor<T>(g.shape()),
                                                      Tensor<T>(g.shape())};
                       for (std::size_t i = 0; i < g.size(); ++i) grads[pick[i]][i] = g[i];
                       t.accumulate(a, grads[0]);
                       t.accumulate(b, grads[1]);
                       t.accumulate(c, grads[2]);
                     });
}

template <typename T>
Var finefeat_forward(Tape<T>& tape, Var input, const FineFeatSpec& spec,
                     std::span<const Var> params) {
  spec.validate();
  const std::size_t expected = is_concat(spec.fusion) ? 8 : 6;
  if (params.size() != expected) {
    throw ShapeError("FineFeat expects " + std::to_string(expected) + " parameter tensors, got " +
                     std::to_string(params.size()));
  }
  if (tape.value(input).shape().c != spec.in_channels) {
    throw ShapeError("FineFeat input channel axis is " +
                     std::to_string(tape.value(input).shape().c) + ", expected " +
                     std::to_string(spec.in_channels));
  }
  // Raw (un-activated) responses: the fusion works on signed values.
  std::array<Var, 3> r;
  for (std::size_t i = 0; i < 3; ++i) {
    r[i] = conv2d(tape, input, params[2 * i], params[2 * i + 1],
                  finefeat_conv(spec, kFineFeatKernels[i]));
  }
  switch (spec.fusion) {
    case Fusion::attention: return attention_fuse(tape, r[0], r[1], r[2]);
    case Fusion::average: return mean3(tape, r[0], r[1], r[2]);
    case Fusion::median: return median3(tape, r[0], r[1], r[2]);
    case Fusion::concat:
    case Fusion::concat_sigmoid: {
      Var merged = concat_channels(tape, std::span<const Var>(r));
      if (spec.fusion == Fusion::concat_sigmoid) merged = sigmoid(tape, merged);
      Var out = conv2d(tape, merged, params[6], params[7], projection_conv(spec));
      return spec.projection_relu ? relu(tape, out) : out;
    }
  }
  throw ConfigError("unknown FineFeat fusion");
}

#define FITHAND_INSTANTIATE_FINEFEAT(T)                                                    \
  template Var finefeat_forward<T>(Tape<T>&, Var, const FineFeatSpec&, std::span<const Var>); \
  template Var mean3<T>(Tape<T>&, Var, Var, Var);                                          \
  template Var median3<T>(Tape<T>&, Var, Var, Var);

FITHAND_INSTANTIATE_FINEFEAT(float)
FITHAND_INSTANTIATE_FINEFEAT(double)

#undef FITHAND_INSTANTIATE_FINEFEAT

}  // namespace fithand
