// Copyright 2026 The radseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "radseg/fft.hpp"
#include "radseg/kernels.hpp"
#include "radseg/ops.hpp"
#include "radseg/radar.hpp"
#include "radseg/rng.hpp"

using namespace radseg;

namespace {

std::vector<Real> random_values(Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Real> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = static_cast<Real>(rng.normal());
  return v;
}

void BM_Gemm(benchmark::State& state) {
  const Index n = state.range(0);
  const auto a = random_values(n * n, 1), b = random_values(n * n, 2);
  std::vector<Real> c(static_cast<std::size_t>(n * n));
  for (auto _ : state) {
    kernels::gemm_acc(n, n, n, a.data(), n, b.data(), n, c.data(), n);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(
      2.0 * double(n) * double(n) * double(n), benchmark::Counter::kIsIterationInvariantRate,
      benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Gemm)->Arg(64)->Arg(256)->Arg(512);

void BM_GemmNt(benchmark::State& state) {
  const Index n = state.range(0), k = 4096;
  const auto a = random_values(n * k, 3), b = random_values(n * k, 4);
  std::vector<Real> c(static_cast<std::size_t>(n * n));
  for (auto _ : state) {
    kernels::gemm_nt_acc(n, n, k, a.data(), k, b.data(), k, c.data(), n);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(
      2.0 * double(n) * double(n) * double(k), benchmark::Counter::kIsIterationInvariantRate,
      benchmark::Counter::kIs1000);
}
BENCHMARK(BM_GemmNt)->Arg(32)->Arg(128);

void BM_Conv2d(benchmark::State& state) {
  const Index c = state.range(0), hw = state.range(1);
  ConvSpec s = ConvSpec::make(c, c, {3, 3}, {1, 1}, {1, 1});
  s.weights = Tensor(s.weights.shape(), random_values(s.weights.numel(), 5));
  const Tensor x({1, c, hw, hw}, random_values(c * hw * hw, 6));
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, s).data());
}
BENCHMARK(BM_Conv2d)->Args({32, 64})->Args({64, 128})->Unit(benchmark::kMillisecond);

void BM_Fft(benchmark::State& state) {
  const Index n = state.range(0);
  Rng rng(7);
  std::vector<Complex> v(static_cast<std::size_t>(n));
  for (auto& z : v) z = Complex(rng.normal(), rng.normal());
  for (auto _ : state) {
    fft_inplace(v);
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(16, 1024);

void BM_FftChain(benchmark::State& state) {
  const RadarParams p = RadarParams::profile(state.range(0) ? "desk" : "small");
  PointTarget t;
  t.range = 0.4 * p.max_range;
  t.velocity = 0.2 * p.max_speed;
  const RadCube adc = synthesize_adc(p, {t}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fft_chain(adc));
}
BENCHMARK(BM_FftChain)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
