/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
// Serial reference loops against the im2col/OpenMP kernels on network-sized layers.

#include <benchmark/benchmark.h>

#include <random>

#include "fithand/conv.hpp"
#include "fithand/threads.hpp"

using namespace fithand;

namespace {

struct Case {
  Tensor<float> input;
  Tensor<float> weights;
  Tensor<float> bias;
  Tensor<float> output;
  Tensor<float> grad_out;
  ConvSpec spec;
};

// range(0): batch, range(1): in channels, range(2): out channels, range(3): kernel,
// range(4): dilation, range(5): spatial size.
Case make_case(const benchmark::State& state) {
  Case c;
  c.spec = same_conv(static_cast<std::size_t>(state.range(1)), static_cast<std::size_t>(state.range(2)),
                     static_cast<std::size_t>(state.range(3)), static_cast<std::size_t>(state.range(4)));
  const auto side = static_cast<std::size_t>(state.range(5));
  const Shape in{static_cast<std::size_t>(state.range(0)), c.spec.in_channels, side, side};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  c.input = Tensor<float>(in);
  for (auto& v : c.input.data()) v = u(rng);
  c.weights = Tensor<float>(conv_weight_shape(c.spec));
  for (auto& v : c.weights.data()) v = u(rng);
  c.bias = Tensor<float>(Shape{1, 1, 1, c.spec.out_channels}, 0.1f);
  c.output = Tensor<float>(conv_output_shape(in, c.weights.shape(), c.spec));
  c.grad_out = Tensor<float>(c.output.shape(), 1.0f);
  return c;
}

void set_flops(benchmark::State& state, const Case& c) {
  const double macs = static_cast<double>(c.output.size()) * static_cast<double>(c.spec.in_channels) *
                      static_cast<double>(c.spec.kernel * c.spec.kernel);
  state.counters["GFLOP/s"] =
      benchmark::Counter(2.0 * macs * static_cast<double>(state.iterations()), benchmark::Counter::kIsRate, 
                         benchmark::Counter::kIs1000);
}

void BM_ForwardReference(benchmark::State& state) {
  Case c = make_case(state);
  for (auto _ : state) {
    reference::conv2d_forward<float>(c.input, c.weights, c.bias.data(), c.spec, c.output);
    benchmark::DoNotOptimize(c.output.data().data());
  }
  set_flops(state, c);
}

void BM_ForwardParallel(benchmark::State& state) {
  Case c = make_case(state);
  for (auto _ : state) {
    kernels::conv2d_forward<float>(c.input, c.weights, c.bias.data(), c.spec, c.output);
    benchmark::DoNotOptimize(c.output.data().data());
  }
  set_flops(state, c);
}

void BM_BackwardReference(benchmark::State& state) {
  Case c = make_case(state);
  Tensor<float> gi(c.input.shape());
  Tensor<float> gw(c.weights.shape());
  std::vector<float> gb(c.spec.out_channels);
  for (auto _ : state) {
    reference::conv2d_backward_data<float>(c.grad_out, c.weights, c.spec, gi);
    reference::conv2d_backward_filter<float>(c.input, c.grad_out, c.spec, gw, gb);
    benchmark::DoNotOptimize(gi.data().data());
    benchmark::DoNotOptimize(gw.data().data());
  }
  set_flops(state, c);
}

void BM_BackwardParallel(benchmark::State& state) {
  Case c = make_case(state);
  Tensor<float> gi(c.input.shape());
  Tensor<float> gw(c.weights.shape());
  std::vector<float> gb(c.spec.out_channels);
  for (auto _ : state) {
    kernels::conv2d_backward_data<float>(c.grad_out, c.weights, c.spec, gi);
    kernels::conv2d_backward_filter<float>(c.input, c.grad_out, c.spec, gw, gb);
    benchmark::DoNotOptimize(gi.data().data());
    benchmark::DoNotOptimize(gw.data().data());
  }
  set_flops(state, c);
}

void layers(benchmark::internal::Benchmark* b) {
  b->ArgNames({"n", "in", "out", "k", "dil", "hw"});
  b->Args({8, 8, 8, 3, 1, 16});   // depth-1/4 stage, 3x3
  b->Args({8, 8, 8, 7, 1, 16});   // depth-1/4 stage, 7x7
  b->Args({8, 8, 16, 3, 2, 16});  // dilated branch
  b->Args({4, 32, 32, 5, 1, 32}); // full-depth stage, 5x5
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_ForwardReference)->Apply(layers);
BENCHMARK(BM_ForwardParallel)->Apply(layers);
BENCHMARK(BM_BackwardReference)->Apply(layers);
BENCHMARK(BM_BackwardParallel)->Apply(layers);

int main(int argc, char** argv) {
  configure_threads();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
