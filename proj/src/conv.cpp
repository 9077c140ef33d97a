/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fithand/conv.hpp"

#include <algorithm>
#include <vector>

namespace fithand {

ConvSpec same_conv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                   std::size_t dilation) {
  ConvSpec spec;
  spec.kernel = kernel;
  spec.stride = 1;
  spec.dilation = dilation;
  spec.pad = effective_kernel(kernel, dilation) / 2;
  spec.in_channels = in_channels;
  spec.out_channels = out_channels;
  return spec;
}

std::size_t conv_output_size(std::size_t in, const ConvSpec& spec) {
  if (spec.kernel == 0 || spec.kernel % 2 == 0) {
    throw ConfigError("conv kernel must be odd and positive, got " + std::to_string(spec.kernel));
  }
  if (spec.stride == 0) throw ConfigError("conv stride must be positive");
  if (spec.dilation == 0) throw ConfigError("conv dilation must be >= 1");
  const std::size_t reach = effective_kernel(spec.kernel, spec.dilation);
  const std::size_t padded = in + 2 * spec.pad;
  if (padded < reach) {
    throw ConfigError("conv output size < 1: input " + std::to_string(in) + " with pad " +
                      std::to_string(spec.pad) + " is smaller than effective kernel " +
                      std::to_string(reach));
  }
  return (padded - reach) / spec.stride + 1;
}

Shape conv_weight_shape(const ConvSpec& spec) {
  return Shape{spec.out_channels, spec.in_channels, spec.kernel, spec.kernel};
}

std::size_t conv_param_count(const ConvSpec& spec) {
  return conv_weight_shape(spec).size() + (spec.has_bias ? spec.out_channels : 0);
}

Shape conv_output_shape(const Shape& input, const Shape& weights, const ConvSpec& spec) {
  if (input.c != spec.in_channels) {
    throw ShapeError("conv input channel axis is " + std::to_string(input.c) + ", spec expects " +
                     std::to_string(spec.in_channels));
  }
  const Shape expected = conv_weight_shape(spec);
  if (weights.n != expected.n) {
    throw ShapeError("conv weight out-channel axis is " + std::to_string(weights.n) +
                     ", spec expects " + std::to_string(expected.n));
  }
  if (weights.c != expected.c) {
    throw ShapeError("conv weight in-channel axis is " + std::to_string(weights.c) +
                     ", spec expects " + std::to_string(expected.c));
  }
  if (weights.h != expected.h || weights.w != expected.w) {
    throw ShapeError("conv weight kernel axes are " + std::to_string(weights.h) + "x" +
                     std::to_string(weights.w) + ", spec expects " + std::to_string(spec.kernel) +
                     "x" + std::to_string(spec.kernel));
  }
  return Shape{input.n, spec.out_channels, conv_output_size(input.h, spec),
               conv_output_size(input.w, spec)};
}

namespace {

struct Geometry {
  std::size_t in_c, in_h, in_w;
  std::size_t out_c, out_h, out_w;
  std::size_t k, stride, dilation, pad;

  std::size_t rows() const { return in_c * k * k; }  // im2col rows
  std::size_t cols() const { return out_h * out_w; }
};

Geometry geometry(const Shape& in, const Shape& out, const ConvSpec& spec) {
  return Geometry{in.c,       in.h,        in.w,          out.c,   out.h,
                  out.w,      spec.kernel, spec.stride,   spec.dilation, spec.pad};
}

// col[(ci*k + ky)*k + kx][oy*out_w + ox] = in[ci][oy*S - pad + ky*D][ox*S - pad + kx*D]
template <typename T>
void im2col(const T* in, const Geometry& g, T* col) {
  const auto ih = static_cast<std::ptrdiff_t>(g.in_h);
  const auto iw = static_cast<std::ptrdiff_t>(g.in_w);
  for (std::size_t ci = 0; ci < g.in_c; ++ci) {
    const T* plane = in + ci * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        T* row = col + ((ci * g.k + ky) * g.k + kx) * g.cols();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto y = static_cast<std::ptrdiff_t>(oy * g.stride + ky * g.dilation) -
                         static_cast<std::ptrdiff_t>(g.pad);
          T* dst = row + oy * g.out_w;
          if (y < 0 || y >= ih) {
            std::fill(dst, dst + g.out_w, T{0});
            continue;
          }
          const T* src = plane + y * iw;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto x = static_cast<std::ptrdiff_t>(ox * g.stride + kx * g.dilation) -
                           static_cast<std::ptrdiff_t>(g.pad);
            dst[ox] = (x < 0 || x >= iw) ? T{0} : src[x];
          }
        }
      }
    }
  }
}

// Scatter-add inverse of im2col.
template <typename T>
void col2im(const T* col, const Geometry& g, T* in) {
  const auto ih = static_cast<std::ptrdiff_t>(g.in_h);
  const auto iw = static_cast<std::ptrdiff_t>(g.in_w);
  std::fill(in, in + g.in_c * g.in_h * g.in_w, T{0});
  for (std::size_t ci = 0; ci < g.in_c; ++ci) {
    T* plane = in + ci * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const T* row = col + ((ci * g.k + ky) * g.k + kx) * g.cols();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto y = static_cast<std::ptrdiff_t>(oy * g.stride + ky * g.dilation) -
                         static_cast<std::ptrdiff_t>(g.pad);
          if (y < 0 || y >= ih) continue;
          const T* src = row + oy * g.out_w;
          T* dst = plane + y * iw;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto x = static_cast<std::ptrdiff_t>(ox * g.stride + kx * g.dilation) -
                           static_cast<std::ptrdiff_t>(g.pad);
            if (x >= 0 && x < iw) dst[x] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

namespace kernels {

template <typename T>
void conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, std::span<const T> bias,
                    const ConvSpec& spec, Tensor<T>& output) {
  const Shape out_shape = conv_output_shape(input.shape(), weights.shape(), spec);
  if (output.shape() != out_shape) output = Tensor<T>(out_shape);
  const Geometry g = geometry(input.shape(), out_shape, spec);
  const std::size_t rows = g.rows();
  const std::size_t cols = g.cols();
  const auto batch = static_cast<std::ptrdiff_t>(input.shape().n);
  const T* w = weights.data().data();

#pragma omp parallel
  {
    std::vector<T> col(rows * cols);
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < batch; ++n) {
      im2col(input.sample(n), g, col.data());
      T* out = output.sample(n);
      for (std::size_t co = 0; co < g.out_c; ++co) {
        T* dst = out + co * cols;
        const T b = bias.empty() ? T{0} : bias[co];
        std::fill(dst, dst + cols, b);
        const T* wrow = w + co * rows;
        for (std::size_t r = 0; r < rows; ++r) {
          const T wv = wrow[r];
          const T* src = col.data() + r * cols;
#pragma omp simd
          for (std::size_t p = 0; p < cols; ++p) dst[p] += wv * src[p];
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_data(const Tensor<T>& grad_output, const Tensor<T>& weights,
                          const ConvSpec& spec, Tensor<T>& grad_input) {
  const Geometry g = geometry(grad_input.shape(), grad_output.shape(), spec);
  const std::size_t rows = g.rows();
  const std::size_t cols = g.cols();
  const auto batch = static_cast<std::ptrdiff_t>(grad_output.shape().n);
  const T* w = weights.data().data();

#pragma omp parallel
  {
    std::vector<T> col(rows * cols);
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < batch; ++n) {
      std::fill(col.begin(), col.end(), T{0});
      const T* gout = grad_output.sample(n);
      for (std::size_t co = 0; co < g.out_c; ++co) {
        const T* grow = gout + co * cols;
        const T* wrow = w + co * rows;
        for (std::size_t r = 0; r < rows; ++r) {
          const T wv = wrow[r];
          T* dst = col.data() + r * cols;
#pragma omp simd
          for (std::size_t p = 0; p < cols; ++p) dst[p] += wv * grow[p];
        }
      }
      col2im(col.data(), g, grad_input.sample(n));
    }
  }
}

template <typename T>
void conv2d_backward_filter(const Tensor<T>& input, const Tensor<T>& grad_output,
                            const ConvSpec& spec, Tensor<T>& grad_weights,
                            std::span<T> grad_bias) {
  const Geometry g = geometry(input.shape(), grad_output.shape(), spec);
  const std::size_t rows = g.rows();
  const std::size_t cols = g.cols();
  const std::size_t batch = input.shape().n;
  const std::size_t wsize = g.out_c * rows;

  // One partial per sample keeps the reduction order independent of scheduling.
  std::vector<T> partial_w(batch * wsize);
  std::vector<T> partial_b(grad_bias.empty() ? 0 : batch * g.out_c);

#pragma omp parallel
  {
    std::vector<T> col(rows * cols);
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(batch); ++n) {
      im2col(input.sample(n), g, col.data());
      const T* gout = grad_output.sample(n);
      T* pw = partial_w.data() + n * wsize;
      for (std::size_t co = 0; co < g.out_c; ++co) {
        const T* grow = gout + co * cols;
        for (std::size_t r = 0; r < rows; ++r) {
          const T* src = col.data() + r * cols;
          T acc{0};
#pragma omp simd reduction(+ : acc)
          for (std::size_t p = 0; p < cols; ++p) acc += grow[p] * src[p];
          pw[co * rows + r] = acc;
        }
        if (!partial_b.empty()) {
          T acc{0};
#pragma omp simd reduction(+ : acc)
          for (std::size_t p = 0; p < cols; ++p) acc += grow[p];
          partial_b[n * g.out_c + co] = acc;
        }
      }
    }
  }

  grad_weights = Tensor<T>(conv_weight_shape(spec));
  T* gw = grad_weights.data().data();
  for (std::size_t n = 0; n < batch; ++n) {
    const T* pw = partial_w.data() + n * wsize;
    for (std::size_t i = 0; i < wsize; ++i) gw[i] += pw[i];
  }
  if (!grad_bias.empty()) {
    std::fill(grad_bias.begin(), grad_bias.end(), T{0});
    for (std::size_t n = 0; n < batch; ++n) {
      for (std::size_t co = 0; co < g.out_c; ++co) grad_bias[co] += partial_b[n * g.out_c + co];
    }
  }
}

}  // namespace kernels

namespace reference {

template <typename T>
void conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, std::span<const T> bias,
                    const ConvSpec& spec, Tensor<T>& output) {
  const Shape os = conv_output_shape(input.shape(), weights.shape(), spec);
  output = Tensor<T>(os);
  const Shape& is = input.shape();
  for (std::size_t n = 0; n < os.n; ++n) {
    for (std::size_t co = 0; co < os.c; ++co) {
      for (std::size_t oy = 0; oy < os.h; ++oy) {
        for (std::size_t ox = 0; ox < os.w; ++ox) {
          T acc = bias.empty() ? T{0} : bias[co];
          for (std::size_t ci = 0; ci < is.c; ++ci) {
            for (std::size_t ky = 0; ky < spec.kernel; ++ky) {
              for (std::size_t kx = 0; kx < spec.kernel; ++kx) {
                const auto y = static_cast<std::ptrdiff_t>(oy * spec.stride + ky * spec.dilation) -
                               static_cast<std::ptrdiff_t>(spec.pad);
                const auto x = static_cast<std::ptrdiff_t>(ox * spec.stride + kx * spec.dilation) -
                               static_cast<std::ptrdiff_t>(spec.pad);
                if (y < 0 || x < 0 || y >= static_cast<std::ptrdiff_t>(is.h) ||
                    x >= static_cast<std::ptrdiff_t>(is.w)) {
                  continue;
                }
                acc += weights.at(co, ci, ky, kx) * input.at(n, ci, y, x);
              }
            }
          }
          output.at(n, co, oy, ox) = acc;
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_data(const Tensor<T>& grad_output, const Tensor<T>& weights,
                          const ConvSpec& spec, Tensor<T>& grad_input) {
  const Shape& os = grad_output.shape();
  const Shape& is = grad_input.shape();
  grad_input.fill(T{0});
  for (std::size_t n = 0; n < os.n; ++n) {
    for (std::size_t co = 0; co < os.c; ++co) {
      for (std::size_t oy = 0; oy < os.h; ++oy) {
        for (std::size_t ox = 0; ox < os.w; ++ox) {
          const T g = grad_output.at(n, co, oy, ox);
          for (std::size_t ci = 0; ci < is.c; ++ci) {
            for (std::size_t ky = 0; ky < spec.kernel; ++ky) {
              for (std::size_t kx = 0; kx < spec.kernel; ++kx) {
                const auto y = static_cast<std::ptrdiff_t>(oy * spec.stride + ky * spec.dilation) -
                               static_cast<std::ptrdiff_t>(spec.pad);
                const auto x = static_cast<std::ptrdiff_t>(ox * spec.stride + kx * spec.dilation) -
                               static_cast<std::ptrdiff_t>(spec.pad);
                if (y < 0 || x < 0 || y >= static_cast<std::ptrdiff_t>(is.h) ||
                    x >= static_cast<std::ptrdiff_t>(is.w)) {
                  continue;
                }
                grad_input.at(n, ci, y, x) += g * weights.at(co, ci, ky, kx);
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_filter(const Tensor<T>& input, const Tensor<T>& grad_output,
                            const ConvSpec& spec, Tensor<T>& grad_weights,
                            std::span<T> grad_bias) {
  const Shape& os = grad_output.shape();
  const Shape& is = input.shape();
  grad_weights = Tensor<T>(conv_weight_shape(spec));
  std::fill(grad_bias.begin(), grad_bias.end(), T{0});
  for (std::size_t n = 0; n < os.n; ++n) {
    for (std::size_t co = 0; co < os.c; ++co) {
      for (std::size_t oy = 0; oy < os.h; ++oy) {
        for (std::size_t ox = 0; ox < os.w; ++ox) {
          const T g = grad_output.at(n, co, oy, ox);
          if (!grad_bias.empty()) grad_bias[co] += g;
          for (std::size_t ci = 0; ci < is.c; ++ci) {
            for (std::size_t ky = 0; ky < spec.kernel; ++ky) {
              for (std::size_t kx = 0; kx < spec.kernel; ++kx) {
                const auto y = static_cast<std::ptrdiff_t>(oy * spec.stride + ky * spec.dilation) -
                               static_cast<std::ptrdiff_t>(spec.pad);
                const auto x = static_cast<std::ptrdiff_t>(ox * spec.stride + kx * spec.dilation) -
                               static_cast<std::ptrdiff_t>(spec.pad);
                if (y < 0 || x < 0 || y >= static_cast<std::ptrdiff_t>(is.h) ||
                    x >= static_cast<std::ptrdiff_t>(is.w)) {
                  continue;
                }
                grad_weights.at(co, ci, ky, kx) += g * input.at(n, ci, y, x);
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace reference

#define FITHAND_INSTANTIATE_CONV(NS, T)                                                         \
  template void NS::conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, std::span<const T>,  \
                                      const ConvSpec&, Tensor<T>&);                             \
  template void NS::conv2d_backward_data<T>(const Tensor<T>&, const Tensor<T>&,                \
                                            const ConvSpec&, Tensor<T>&);                       \
  template void NS::conv2d_backward_filter<T>(const Tensor<T>&, const Tensor<T>&,              \
                                              const ConvSpec&, Tensor<T>&, std::span<T>);

FITHAND_INSTANTIATE_CONV(kernels, float)
FITHAND_INSTANTIATE_CONV(kernels, double)
FITHAND_INSTANTIATE_CONV(reference, float)
FITHAND_INSTANTIATE_CONV(reference, double)

#undef FITHAND_INSTANTIATE_CONV

}  // namespace fithand
