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

#include "radseg/models.hpp"
#include "radseg/ops.hpp"
#include "radseg/rng.hpp"

using namespace radseg;

namespace {

Tensor random_input(const Shape& s, Rng& rng) {
  std::vector<Real> v(static_cast<std::size_t>(numel(s)));
  for (auto& x : v) x = static_cast<Real>(rng.uniform());
  return Tensor(s, std::move(v));
}

// Desk-profile views (128 x 128 x 32), batch 1.
ModelInput desk_input(const ModelConfig& c, Rng& rng) {
  auto shape = [&](Index h, Index w) {
    return c.temporal() ? Shape{1, 1, c.frames(), h, w} : Shape{1, c.frames(), h, w};
  };
  ModelInput in;
  in.rd = random_input(shape(c.n_range, c.n_doppler), rng);
  in.ra = random_input(shape(c.n_range, c.n_angle), rng);
  if (c.uses_ad()) in.ad = random_input(shape(c.n_angle, c.n_doppler), rng);
  return in;
}

ModelConfig desk(Variant v) {
  ModelConfig c;
  c.variant = v;
  c.width = 0.25;
  c.n_range = 128;
  c.n_angle = 128;
  c.n_doppler = 32;
  return c;
}

void BM_Forward(benchmark::State& state) {
  const ModelConfig c = desk(static_cast<Variant>(state.range(0)));
  Model m(c, 1);
  Rng rng(2);
  const ModelInput in = desk_input(c, rng);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(m.forward(in, false).p_ra.data());
  state.SetLabel(variant_name(c.variant));
}
BENCHMARK(BM_Forward)
    ->DenseRange(0, 3)
    ->Unit(benchmark::kMillisecond)
    ->Iterations(3);

void BM_ForwardBackward(benchmark::State& state) {
  const ModelConfig c = desk(Variant::kTmvaNet);
  Model m(c, 1);
  Rng rng(3);
  const ModelInput in = desk_input(c, rng);
  for (auto _ : state) {
    const auto out = m.forward(in, true);
    add(sum(out.p_rd), sum(out.p_ra)).backward();
  }
}
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace
