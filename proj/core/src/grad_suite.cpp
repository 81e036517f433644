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

#include "radseg/grad_suite.hpp"

#include <algorithm>
#include <numeric>

#include "radseg/losses.hpp"
#include "radseg/models.hpp"
#include "radseg/ops.hpp"
#include "radseg/rng.hpp"

RADSEG_NAMESPACE_BEGIN

namespace {

Tensor randn(const Shape& s, Rng& rng, double sd = 1.0) {
  std::vector<Real> v(static_cast<std::size_t>(numel(s)));
  for (auto& x : v) x = static_cast<Real>(rng.normal(0, sd));
  return Tensor(s, std::move(v));
}

Tensor uniform(const Shape& s, Rng& rng, double lo, double hi) {
  std::vector<Real> v(static_cast<std::size_t>(numel(s)));
  for (auto& x : v) x = static_cast<Real>(rng.uniform(lo, hi));
  return Tensor(s, std::move(v));
}

// Magnitudes in [0.05, 1] with random signs: no value near the leaky kink.
Tensor away_from_zero(const Shape& s, Rng& rng) {
  std::vector<Real> v(static_cast<std::size_t>(numel(s)));
  for (auto& x : v) {
    x = static_cast<Real>(rng.uniform(0.05, 1.0) * (rng.coin() ? 1 : -1));
  }
  return Tensor(s, std::move(v));
}

// A shuffled ladder with spacing 0.1 (plus jitter): no two values within
// 0.05, so max selections are stable under the perturbation.
Tensor distinct(const Shape& s, Rng& rng) {
  const auto n = static_cast<std::size_t>(numel(s));
  std::vector<Real> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = static_cast<Real>(0.1 * static_cast<double>(i) + rng.uniform(0, 0.05) -
                             0.05 * static_cast<double>(n));
  }
  rng.shuffle(v.begin(), v.end());
  return Tensor(s, std::move(v));
}

// Probabilities in (0.05, 0.95) laid out on a per-column ladder along every
// axis except the last two, so per-class maxima are well separated.
Tensor separated_probs(const Shape& s, Rng& rng) {
  Tensor t = distinct(s, rng);
  const Real lo = *std::min_element(t.values().begin(), t.values().end());
  const Real hi = *std::max_element(t.values().begin(), t.values().end());
  for (auto& x : t.values()) x = Real(0.05) + Real(0.9) * (x - lo) / (hi - lo);
  return t;
}

Tensor one_hot_random(Index b, Index k, Index h, Index w, Rng& rng) {
  Tensor y(Shape{b, k, h, w});
  for (Index i = 0; i < b; ++i) {
    for (Index p = 0; p < h * w; ++p) {
      const auto c = static_cast<Index>(rng.below(static_cast<std::uint64_t>(k)));
      y.values()[static_cast<std::size_t>((i * k + c) * h * w + p)] = 1;
    }
  }
  return y;
}

// f(x) = sum(r * g(x)) for a fixed random r.
Tensor project(const Tensor& y, const Tensor& r) { return sum(mul(y, r)); }

struct Accumulator {
  GradSuiteEntry entry;
  int seed = 0;
  void add(const GradCheckResult& r) {
    if (r.worst_index >= 0 && (entry.worst_seed < 0 || r.max_rel_error > entry.max_rel_error)) {
      entry.max_rel_error = r.max_rel_error;
      entry.worst_seed = seed;
      entry.worst_analytic = r.analytic;
      entry.worst_numeric = r.numeric;
    }
    entry.checked += r.checked;
  }
};

using Check = std::function<void(Rng&, double, Accumulator&)>;

struct NamedCheck {
  std::string name;
  Check run;
};

void check_conv(Rng& rng, double eps, Accumulator& acc, Shape in, ConvSpec spec,
                int rank, bool transposed) {
  spec.weights = randn(spec.weights.shape(), rng, 0.5);
  if (spec.bias.defined()) spec.bias = randn(spec.bias.shape(), rng, 0.5);
  Tensor x = randn(in, rng);
  auto apply = [&](const Tensor& xin, const ConvSpec& s) {
    if (transposed) return conv_transpose2d(xin, s);
    return rank == 2 ? conv2d(xin, s) : conv3d(xin, s);
  };
  Tensor r;
  {
    NoGradGuard g;
    r = randn(apply(x, spec).shape(), rng);
  }
  acc.add(grad_check([&] { return project(apply(x, spec), r); }, x, eps));
  acc.add(grad_check([&] { return project(apply(x, spec), r); }, spec.weights, eps));
  if (spec.bias.defined()) {
    acc.add(grad_check([&] { return project(apply(x, spec), r); }, spec.bias, eps));
  }
}

std::vector<NamedCheck> op_checks() {
  std::vector<NamedCheck> c;
  c.push_back({"conv2d", [](Rng& rng, double eps, Accumulator& acc) {
                 check_conv(rng, eps, acc, {2, 3, 6, 7},
                            ConvSpec::make(3, 4, {3, 2}, {2, 1}, {1, 1}, {1, 2}), 2,
                            false);
                 check_conv(rng, eps, acc, {2, 2, 5, 5},
                            ConvSpec::make(2, 3, {3, 3}, {1, 1}, {2, 2}, {2, 2}, false),
                            2, false);
               }});
  c.push_back({"conv3d", [](Rng& rng, double eps, Accumulator& acc) {
                 check_conv(rng, eps, acc, {2, 2, 4, 4, 5},
                            ConvSpec::make(2, 3, {3, 3, 3}, {1, 1, 1}, {0, 1, 1}), 3,
                            false);
               }});
  c.push_back({"conv_transpose2d", [](Rng& rng, double eps, Accumulator& acc) {
                 check_conv(rng, eps, acc, {2, 3, 3, 4},
                            ConvSpec::make(3, 2, {2, 2}, {2, 2}, {}, {}, true, true), 2,
                            true);
                 check_conv(rng, eps, acc, {2, 2, 3, 3},
                            ConvSpec::make(2, 3, {2, 1}, {2, 1}, {}, {}, true, true), 2,
                            true);
               }});
  c.push_back({"maxpool2d", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor x = distinct({2, 2, 6, 4}, rng);
                 Tensor r1 = randn({2, 2, 3, 2}, rng), r2 = randn({2, 2, 3, 4}, rng);
                 acc.add(grad_check([&] { return project(maxpool2d(x, {2, 2}, {2, 2}), r1); },
                                    x, eps));
                 acc.add(grad_check([&] { return project(maxpool2d(x, {2, 1}, {2, 1}), r2); },
                                    x, eps));
               }});
  c.push_back({"batch_norm", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor x = randn({3, 2, 3, 4}, rng);
                 BatchNormParams bn = BatchNormParams::make(2);
                 bn.gamma = uniform({2}, rng, 0.5, 1.5);
                 bn.beta = randn({2}, rng);
                 bn.running_mean = randn({2}, rng);
                 bn.running_var = uniform({2}, rng, 0.5, 2.0);
                 Tensor r = randn(x.shape(), rng);
                 for (bool training : {true, false}) {
                   auto f = [&] { return project(batch_norm(x, bn, training), r); };
                   acc.add(grad_check(f, x, eps));
                   acc.add(grad_check(f, bn.gamma, eps));
                   acc.add(grad_check(f, bn.beta, eps));
                 }
               }});
  c.push_back({"leaky_relu", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor x = away_from_zero({2, 3, 4}, rng);
                 Tensor r = randn(x.shape(), rng);
                 acc.add(grad_check([&] { return project(leaky_relu(x), r); }, x, eps));
               }});
  c.push_back({"softmax_channels", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor x = randn({2, 4, 3, 2}, rng, 2.0);
                 Tensor r = randn(x.shape(), rng);
                 acc.add(grad_check([&] { return project(softmax_channels(x), r); }, x, eps));
               }});
  c.push_back({"concat_channels", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor a = randn({2, 2, 3, 3}, rng), b = randn({2, 3, 3, 3}, rng);
                 Tensor r = randn({2, 5, 3, 3}, rng);
                 auto f = [&] { return project(concat_channels({a, b}), r); };
                 acc.add(grad_check(f, a, eps));
                 acc.add(grad_check(f, b, eps));
               }});
  c.push_back({"slice_channels", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor x = randn({2, 5, 3, 2}, rng);
                 Tensor r = randn({2, 2, 3, 2}, rng);
                 acc.add(grad_check([&] { return project(slice_channels(x, 2, 2), r); }, x,
                                    eps));
               }});
  c.push_back({"reshape", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor x = randn({2, 3, 1, 4, 2}, rng);
                 Tensor r = randn({2, 3, 4, 2}, rng);
                 acc.add(grad_check([&] { return project(reshape(x, {2, 3, 4, 2}), r); }, x,
                                    eps));
               }});
  c.push_back({"global_avg_pool", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor x = randn({2, 3, 4, 5}, rng);
                 Tensor r = randn({2, 3, 1, 1}, rng);
                 acc.add(grad_check([&] { return project(global_avg_pool(x), r); }, x, eps));
               }});
  c.push_back({"broadcast_spatial", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor x = randn({2, 3, 1, 1}, rng);
                 Tensor r = randn({2, 3, 4, 5}, rng);
                 acc.add(grad_check([&] { return project(broadcast_spatial(x, 4, 5), r); },
                                    x, eps));
               }});
  c.push_back({"elementwise", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor a = randn({3, 4}, rng), b = randn({3, 4}, rng);
                 Tensor r = randn({3, 4}, rng);
                 auto f_add = [&] { return project(add(a, b), r); };
                 auto f_mul = [&] { return project(mul(a, b), r); };
                 acc.add(grad_check(f_add, a, eps));
                 acc.add(grad_check(f_add, b, eps));
                 acc.add(grad_check(f_mul, a, eps));
                 acc.add(grad_check(f_mul, b, eps));
                 acc.add(grad_check([&] { return project(scale(a, Real(-1.7)), r); }, a, eps));
                 acc.add(grad_check([&] { return scale(sum(mul(a, a)), Real(0.5)); }, a, eps));
                 acc.add(grad_check([&] { return mean(mul(a, r)); }, a, eps));
               }});
  c.push_back({"flip", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor x = randn({2, 3, 4}, rng);
                 Tensor r = randn(x.shape(), rng);
                 for (int axis : {0, 1, -1}) {
                   acc.add(grad_check([&] { return project(flip(x, axis), r); }, x, eps));
                 }
               }});
  return c;
}

std::vector<NamedCheck> loss_checks() {
  std::vector<NamedCheck> c;
  c.push_back({"loss_wce", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor p = uniform({2, 4, 3, 5}, rng, 0.05, 0.95);
                 Tensor y = one_hot_random(2, 4, 3, 5, rng);
                 std::vector<Real> w(4);
                 for (auto& v : w) v = static_cast<Real>(rng.uniform(0.1, 1.0));
                 acc.add(grad_check([&] { return wce_loss(p, y, w); }, p, eps));
               }});
  c.push_back({"loss_soft_dice", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor p = uniform({2, 4, 3, 5}, rng, 0.05, 0.95);
                 Tensor y = one_hot_random(2, 4, 3, 5, rng);
                 acc.add(grad_check([&] { return soft_dice_loss(p, y); }, p, eps));
               }});
  c.push_back({"loss_coherence", [](Rng& rng, double eps, Accumulator& acc) {
                 Tensor p_rd = separated_probs({2, 4, 5, 3}, rng);
                 Tensor p_ra = separated_probs({2, 4, 5, 6}, rng);
                 auto f = [&] { return coherence_loss(p_rd, p_ra); };
                 acc.add(grad_check(f, p_rd, eps));
                 acc.add(grad_check(f, p_ra, eps));
               }});
  return c;
}

}  // namespace

GradSuiteEntry model_gradcheck(std::uint64_t seed, double eps, Index coords_per_tensor) {
  Rng rng(seed);
  ModelConfig mc;
  mc.variant = Variant::kTmvaNet;
  mc.width = 0.125;
  mc.n_range = 16;
  mc.n_angle = 16;
  mc.n_doppler = 4;
  Model model(mc, derive_seed(seed, 1));
  // Non-trivial BN affine parameters and biases.
  for (const auto& p : model.parameters()) {
    Tensor t = p.tensor;
    if (p.name.ends_with(".bias") || p.name.ends_with(".beta")) {
      for (auto& v : t.values()) v = static_cast<Real>(rng.normal(0, 0.1));
    } else if (p.name.ends_with(".gamma")) {
      for (auto& v : t.values()) v = static_cast<Real>(rng.uniform(0.5, 1.5));
    }
  }
  const Index b = 2, q1 = mc.frames();
  ModelInput in{uniform({b, 1, q1, 16, 4}, rng, 0, 1), uniform({b, 1, q1, 16, 16}, rng, 0, 1),
                uniform({b, 1, q1, 16, 4}, rng, 0, 1)};
  const Tensor y_rd = one_hot_random(b, 4, 16, 4, rng);
  const Tensor y_ra = one_hot_random(b, 4, 16, 16, rng);
  const std::vector<Real> w{Real(0.05), Real(0.3), Real(0.3), Real(0.35)};
  auto f = [&] {
    const SegmentationOutput out = model.forward(in, true);
    return combined_loss(out.p_rd, out.p_ra, y_rd, y_ra, w, LossWeights{}).total;
  };

  Accumulator acc;
  acc.entry.name = "tmva_net_end_to_end";
  acc.entry.tolerance = 1e-3;
  auto sample = [&](const Tensor& t) {
    std::vector<Index> coords;
    for (Index i = 0; i < coords_per_tensor; ++i) {
      coords.push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(t.numel()))));
    }
    return coords;
  };
  for (const auto& p : model.parameters()) {
    acc.add(grad_check(f, p.tensor, eps, sample(p.tensor)));
  }
  for (const Tensor* x : {&in.rd, &in.ra, &in.ad}) {
    acc.add(grad_check(f, *x, eps, sample(*x)));
  }
  return acc.entry;
}

std::vector<GradSuiteEntry> run_grad_suite(
    const GradSuiteOptions& options,
    const std::function<void(const GradSuiteEntry&)>& progress) {
  std::vector<NamedCheck> checks = op_checks();
  for (auto& c : loss_checks()) checks.push_back(std::move(c));
  std::vector<GradSuiteEntry> out;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Accumulator acc;
    acc.entry.name = checks[i].name;
    for (int s = 0; s < options.seeds; ++s) {
      acc.seed = s;
      Rng rng(derive_seed(derive_seed(options.base_seed, i), static_cast<std::uint64_t>(s)));
      checks[i].run(rng, options.eps, acc);
    }
    if (progress) progress(acc.entry);
    out.push_back(acc.entry);
  }
  if (options.full) {
    GradSuiteEntry e = model_gradcheck(options.base_seed, options.eps);
    if (progress) progress(e);
    out.push_back(e);
  }
  return out;
}

RADSEG_NAMESPACE_END
