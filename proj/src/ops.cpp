/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fithand {

std::string_view loss_name(LossKind kind) {
  return kind == LossKind::cross_entropy ? "ce" : "kl";
}

LossKind parse_loss(std::string_view name) {
  if (name == "ce" || name == "cross_entropy") return LossKind::cross_entropy;
  if (name == "kl" || name == "kl_divergence") return LossKind::kl_divergence;
  throw ConfigError("unknown loss '" + std::string(name) + "' (expected ce or kl)");
}

template <typename T>
Var conv2d(Tape<T>& tape, Var input, Var weights, std::optional<Var> bias, const ConvSpec& spec) {
  const Tensor<T>& w = tape.value(weights);
  std::span<const T> b;
  if (bias) {
    const Tensor<T>& bt = tape.value(*bias);
    if (bt.size() != spec.out_channels) {
      throw ShapeError("conv bias has " + std::to_string(bt.size()) + " entries, expected " +
                       std::to_string(spec.out_channels));
    }
    b = bt.data();
  }
  Tensor<T> out;
  kernels::conv2d_forward(tape.value(input), w, b, spec, out);

  std::vector<Var> inputs{input, weights};
  if (bias) inputs.push_back(*bias);
  return tape.record(std::move(out), inputs, [=](Tape<T>& t, const Tensor<T>& g, Var) {
    if (t.requires_grad(input)) {
      Tensor<T> gi(t.value(input).shape());
      kernels::conv2d_backward_data(g, t.value(weights), spec, gi);
      t.accumulate(input, gi);
    }
    const bool want_bias = bias && t.requires_grad(*bias);
    if (t.requires_grad(weights) || want_bias) {
      Tensor<T> gw;
      Tensor<T> gb(Shape{1, 1, 1, spec.out_channels});
      kernels::conv2d_backward_filter(t.value(input), g, spec, gw,
                                      want_bias ? gb.data() : std::span<T>{});
      t.accumulate(weights, gw);
      if (want_bias) t.accumulate(*bias, gb.reshaped(t.value(*bias).shape()));
    }
  });
}

template <typename T>
Var relu(Tape<T>& tape, Var x) {
  Tensor<T> out = tape.value(x);
  for (auto& v : out.data()) v = v > T{0} ? v : T{0};
  return tape.record(std::move(out), {x}, [x](Tape<T>& t, const Tensor<T>& g, Var) {
    const Tensor<T>& in = t.value(x);
    Tensor<T> gi(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) gi[i] = in[i] > T{0} ? g[i] : T{0};
    t.accumulate(x, gi);
  });
}

template <typename T>
Var sigmoid(Tape<T>& tape, Var x) {
  Tensor<T> out = tape.value(x);
  for (auto& v : out.data()) v = T{1} / (T{1} + std::exp(-v));
  return tape.record(std::move(out), {x}, [x](Tape<T>& t, const Tensor<T>& g, Var self) {
    const Tensor<T>& s = t.value(self);
    Tensor<T> gi(s.shape());
    for (std::size_t i = 0; i < s.size(); ++i) gi[i] = g[i] * s[i] * (T{1} - s[i]);
    t.accumulate(x, gi);
  });
}

template <typename T>
Var add(Tape<T>& tape, Var a, Var b) {
  const Tensor<T>& ta = tape.value(a);
  const Tensor<T>& tb = tape.value(b);
  if (ta.shape() != tb.shape()) {
    throw ShapeError("add operands differ: " + ta.shape().str() + " vs " + tb.shape().str());
  }
  Tensor<T> out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
  return tape.record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g, Var) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

template <typename T>
Var concat_channels(Tape<T>& tape, std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat needs at least one input");
  const Shape first = tape.value(parts[0]).shape();
  std::size_t channels = 0;
  for (Var p : parts) {
    const Shape s = tape.value(p).shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeError("concat operands differ outside the channel axis: " + first.str() +
                       " vs " + s.str());
    }
    channels += s.c;
  }
  Tensor<T> out(Shape{first.n, channels, first.h, first.w});
  const std::size_t plane = first.plane();
  for (std::size_t n = 0; n < first.n; ++n) {
    T* dst = out.sample(n);
    for (Var p : parts) {
      const Tensor<T>& src = tape.value(p);
      const std::size_t len = src.shape().c * plane;
      std::copy_n(src.sample(n), len, dst);
      dst += len;
    }
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.record(std::move(out), inputs, [inputs, plane](Tape<T>& t, const Tensor<T>& g, Var) {
    for (std::size_t n = 0, offset = 0; n < g.shape().n; ++n, offset = 0) {
      for (Var p : inputs) {
        const std::size_t len = t.value(p).shape().c * plane;
        if (t.requires_grad(p)) {
          T* dst = t.grad(p).sample(n);
          const T* src = g.sample(n) + offset;
          for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
        }
        offset += len;
      }
    }
  });
}

template <typename T>
Var lrn(Tape<T>& tape, Var x, const LrnParams& params) {
  if (!(params.k > 0.0)) throw ConfigError("LRN k must be positive");
  if (params.size == 0 || params.size % 2 == 0) throw ConfigError("LRN window must be odd");
  const Tensor<T>& in = tape.value(x);
  const Shape s = in.shape();
  const std::size_t half = params.size / 2;
  const T k = static_cast<T>(params.k);
  const T alpha = static_cast<T>(params.alpha);
  const T beta = static_cast<T>(params.beta);

  // scale = k + alpha * windowed sum of squares
  Tensor<T> scale(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t lo = c >= half ? c - half : 0;
      const std::size_t hi = std::min(s.c - 1, c + half);
      for (std::size_t p = 0; p < s.plane(); ++p) {
        T acc{0};
        for (std::size_t j = lo; j <= hi; ++j) {
          const T v = in.sample(n)[j * s.plane() + p];
          acc += v * v;
        }
        scale.sample(n)[c * s.plane() + p] = k + alpha * acc;
      }
    }
  }
  Tensor<T> out(s);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] * std::pow(scale[i], -beta);

  return tape.record(std::move(out), {x}, [=, scale = std::move(scale)](Tape<T>& t, const Tensor<T>& g,
                                                                        Var) {
    const Tensor<T>& xin = t.value(x);
    // q_i = g_i * x_i * scale_i^(-beta-1), spread back over each window.
    Tensor<T> q(s);
    Tensor<T> gi(s);
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = g[i] * xin[i] * std::pow(scale[i], -beta - T{1});
      gi[i] = g[i] * std::pow(scale[i], -beta);
    }
    const T coeff = T{2} * alpha * beta;
    for (std::size_t n = 0; n < s.n; ++n) {
      for (std::size_t j = 0; j < s.c; ++j) {
        const std::size_t lo = j >= half ? j - half : 0;
        const std::size_t hi = std::min(s.c - 1, j + half);
        for (std::size_t p = 0; p < s.plane(); ++p) {
          T acc{0};
          for (std::size_t c = lo; c <= hi; ++c) acc += q.sample(n)[c * s.plane() + p];
          const std::size_t idx = j * s.plane() + p;
          gi.sample(n)[idx] -= coeff * xin.sample(n)[idx] * acc;
        }
      }
    }
    t.accumulate(x, gi);
  });
}

template <typename T>
Var l2_normalize(Tape<T>& tape, Var x, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("L2 normalization epsilon must be positive");
  const Tensor<T>& in = tape.value(x);
  const Shape s = in.shape();
  const std::size_t len = s.sample_size();
  const T eps = static_cast<T>(epsilon);
  std::vector<T> norms(s.n);
  Tensor<T> out(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    const T* v = in.sample(n);
    T ss{0};
    for (std::size_t i = 0; i < len; ++i) ss += v[i] * v[i];
    norms[n] = std::sqrt(ss);
    const T denom = std::max(norms[n], eps);
    T* o = out.sample(n);
    for (std::size_t i = 0; i < len; ++i) o[i] = v[i] / denom;
  }
  return tape.record(std::move(out), {x},
                     [x, norms = std::move(norms), eps, len](Tape<T>& t, const Tensor<T>& g,
                                                             Var self) {
                       const Tensor<T>& yv = t.value(self);
                       Tensor<T> gi(yv.shape());
                       for (std::size_t n = 0; n < yv.shape().n; ++n) {
                         const T* yn = yv.sample(n);
                         const T* gn = g.sample(n);
                         T* dst = gi.sample(n);
                         if (norms[n] > eps) {
                           T dot{0};
                           for (std::size_t i = 0; i < len; ++i) dot += yn[i] * gn[i];
                           for (std::size_t i = 0; i < len; ++i) {
                             dst[i] = (gn[i] - yn[i] * dot) / norms[n];
                           }
                         } else {
                           for (std::size_t i = 0; i < len; ++i) dst[i] = gn[i] / eps;
                         }
                       }
                       t.accumulate(x, gi);
                     });
}

template <typename T>
Var dense(Tape<T>& tape, Var x, Var weights, Var bias) {
  const Tensor<T>& in = tape.value(x);
  const Tensor<T>& w = tape.value(weights);
  const Tensor<T>& b = tape.value(bias);
  const std::size_t features = in.shape().sample_size();
  const std::size_t classes = w.shape().w;
  if (w.shape().h != features || w.shape().n != 1 || w.shape().c != 1) {
    throw ShapeError("dense weights " + w.shape().str() + " do not accept " +
                     std::to_string(features) + " features per sample");
  }
  if (b.size() != classes) {
    throw ShapeError("dense bias has " + std::to_string(b.size()) + " entries, expected " +
                     std::to_string(classes));
  }
  const std::size_t batch = in.shape().n;
  Tensor<T> out(Shape{batch, classes, 1, 1});
  for (std::size_t n = 0; n < batch; ++n) {
    T* o = out.sample(n);
    std::copy_n(b.data().data(), classes, o);
    const T* v = in.sample(n);
    for (std::size_t f = 0; f < features; ++f) {
      const T vf = v[f];
      const T* wrow = w.data().data() + f * classes;
      for (std::size_t c = 0; c < classes; ++c) o[c] += vf * wrow[c];
    }
  }
  return tape.record(std::move(out), {x, weights, bias}, [=](Tape<T>& t, const Tensor<T>& g, Var) {
    const Tensor<T>& xin = t.value(x);
    const Tensor<T>& wv = t.value(weights);
    if (t.requires_grad(x)) {
      Tensor<T> gi(xin.shape());
      for (std::size_t n = 0; n < batch; ++n) {
        const T* gn = g.sample(n);
        T* dst = gi.sample(n);
        for (std::size_t f = 0; f < features; ++f) {
          const T* wrow = wv.data().data() + f * classes;
          T acc{0};
          for (std::size_t c = 0; c < classes; ++c) acc += wrow[c] * gn[c];
          dst[f] = acc;
        }
      }
      t.accumulate(x, gi);
    }
    if (t.requires_grad(weights)) {
      Tensor<T> gw(wv.shape());
      for (std::size_t n = 0; n < batch; ++n) {
        const T* gn = g.sample(n);
        const T* v = xin.sample(n);
        for (std::size_t f = 0; f < features; ++f) {
          T* dst = gw.data().data() + f * classes;
          for (std::size_t c = 0; c < classes; ++c) dst[c] += v[f] * gn[c];
        }
      }
      t.accumulate(weights, gw);
    }
    if (t.requires_grad(bias)) {
      Tensor<T> gb(t.value(bias).shape());
      for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t c = 0; c < classes; ++c) gb[c] += g.sample(n)[c];
      }
      t.accumulate(bias, gb);
    }
  });
}

template <typename T>
Var sum(Tape<T>& tape, Var x) {
  T acc{0};
  for (T v : tape.value(x).data()) acc += v;
  return tape.record(Tensor<T>(Shape{}, acc), {x}, [x](Tape<T>& t, const Tensor<T>& g, Var) {
    Tensor<T> gi(t.value(x).shape(), g[0]);
    t.accumulate(x, gi);
  });
}

namespace {

template <typename T>
void check_labels(const Tensor<T>& logits, std::span<const int> labels) {
  if (labels.size() != logits.shape().n) {
    throw ShapeError("got " + std::to_string(labels.size()) + " labels for a batch of " +
                     std::to_string(logits.shape().n));
  }
  const auto classes = static_cast<int>(logits.shape().sample_size());
  for (int label : labels) {
    if (label < 0 || label >= classes) {
      throw InputError("label " + std::to_string(label) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
}

// log-softmax of one row with max subtraction.
template <typename T>
void log_softmax(const T* z, std::size_t classes, T* out) {
  const T zmax = *std::max_element(z, z + classes);
  T acc{0};
  for (std::size_t c = 0; c < classes; ++c) acc += std::exp(z[c] - zmax);
  const T lse = zmax + std::log(acc);
  for (std::size_t c = 0; c < classes; ++c) out[c] = z[c] - lse;
}

}  // namespace

template <typename T>
LossValue<T> cross_entropy_loss(const Tensor<T>& logits, std::span<const int> labels) {
  check_labels(logits, labels);
  const std::size_t batch = logits.shape().n;
  const std::size_t classes = logits.shape().sample_size();
  LossValue<T> result{T{0}, Tensor<T>(logits.shape())};
  std::vector<T> logp(classes);
  for (std::size_t n = 0; n < batch; ++n) {
    log_softmax(logits.sample(n), classes, logp.data());
    result.loss -= logp[labels[n]];
    T* g = result.grad.sample(n);
    for (std::size_t c = 0; c < classes; ++c) g[c] = std::exp(logp[c]) / static_cast<T>(batch);
    g[labels[n]] -= T{1} / static_cast<T>(batch);
  }
  result.loss /= static_cast<T>(batch);
  return result;
}

template <typename T>
LossValue<T> kl_divergence_loss(const Tensor<T>& logits, std::span<const int> labels) {
  check_labels(logits, labels);
  const std::size_t batch = logits.shape().n;
  const std::size_t classes = logits.shape().sample_size();
  LossValue<T> result{T{0}, Tensor<T>(logits.shape())};
  std::vector<T> logp(classes);
  std::vector<T> target(classes);
  for (std::size_t n = 0; n < batch; ++n) {
    log_softmax(logits.sample(n), classes, logp.data());
    std::fill(target.begin(), target.end(), T{0});
    target[labels[n]] = T{1};
    T* g = result.grad.sample(n);
    for (std::size_t c = 0; c < classes; ++c) {
      // 0 * log 0 contributes nothing.
      if (target[c] > T{0}) result.loss += target[c] * (std::log(target[c]) - logp[c]);
      g[c] = (std::exp(logp[c]) - target[c]) / static_cast<T>(batch);
    }
  }
  result.loss /= static_cast<T>(batch);
  return result;
}

template <typename T>
Var loss(Tape<T>& tape, Var logits, std::span<const int> labels, LossKind kind) {
  LossValue<T> lv = kind == LossKind::cross_entropy
                        ? cross_entropy_loss(tape.value(logits), labels)
                        : kl_divergence_loss(tape.value(logits), labels);
  return tape.record(Tensor<T>(Shape{}, lv.loss), {logits},
                     [logits, grad = std::move(lv.grad)](Tape<T>& t, const Tensor<T>& g, Var) {
                       Tensor<T> gi = grad;
                       for (auto& v : gi.data()) v *= g[0];
                       t.accumulate(logits, gi);
                     });
}

#define FITHAND_INSTANTIATE_OPS(T)                                                             \
  template Var conv2d<T>(Tape<T>&, Var, Var, std::optional<Var>, const ConvSpec&);             \
  template Var relu<T>(Tape<T>&, Var);                                                          \
  template Var sigmoid<T>(Tape<T>&, Var);                                                       \
  template Var add<T>(Tape<T>&, Var, Var);                                                      \
  template Var concat_channels<T>(Tape<T>&, std::span<const Var>);                              \
  template Var lrn<T>(Tape<T>&, Var, const LrnParams&);                                         \
  template Var l2_normalize<T>(Tape<T>&, Var, double);                                          \
  template Var dense<T>(Tape<T>&, Var, Var, Var);                                               \
  template Var sum<T>(Tape<T>&, Var);                                                           \
  template LossValue<T> cross_entropy_loss<T>(const Tensor<T>&, std::span<const int>);         \
  template LossValue<T> kl_divergence_loss<T>(const Tensor<T>&, std::span<const int>);         \
  template Var loss<T>(Tape<T>&, Var, std::span<const int>, LossKind);

FITHAND_INSTANTIATE_OPS(float)
FITHAND_INSTANTIATE_OPS(double)

#undef FITHAND_INSTANTIATE_OPS

}  // namespace fithand
