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

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "radseg/models.hpp"
#include "radseg/rng.hpp"
#include "layer_tables.hpp"
#include "test_util.hpp"

using namespace radseg;
using namespace radseg_test;

namespace {

ModelConfig full(Variant v) {
  ModelConfig c;
  c.variant = v;
  return c;
}

ModelConfig tiny(Variant v) {
  ModelConfig c;
  c.variant = v;
  c.width = 0.125;
  c.n_range = 16;
  c.n_angle = 16;
  c.n_doppler = 4;
  return c;
}

Tensor random_input(const Shape& s, Rng& rng) {
  std::vector<Real> v(static_cast<std::size_t>(numel(s)));
  for (auto& x : v) x = static_cast<Real>(rng.uniform());
  return Tensor(s, std::move(v));
}

ModelInput random_batch(const ModelConfig& c, Index batch, Rng& rng) {
  auto shape = [&](Index h, Index w) {
    return c.temporal() ? Shape{batch, 1, c.frames(), h, w}
                        : Shape{batch, c.frames(), h, w};
  };
  ModelInput in;
  in.rd = random_input(shape(c.n_range, c.n_doppler), rng);
  in.ra = random_input(shape(c.n_range, c.n_angle), rng);
  if (c.uses_ad()) in.ad = random_input(shape(c.n_angle, c.n_doppler), rng);
  return in;
}

std::map<std::string, Shape> trace_map(Variant v) {
  Model m(full(v));
  std::map<std::string, Shape> out;
  for (const auto& t : m.trace_shapes()) out[t.name] = t.shape;
  return out;
}

Tensor select_sample(const Tensor& t, Index i) {
  const Index per = t.numel() / t.dim(0);
  Shape s = t.shape();
  s[0] = 1;
  std::vector<Real> v(t.values().begin() + i * per, t.values().begin() + (i + 1) * per);
  return Tensor(s, std::move(v));
}

Tensor permute_batch(const Tensor& t, const std::vector<Index>& order) {
  const Index per = t.numel() / t.dim(0);
  std::vector<Real> v;
  for (Index i : order)
    v.insert(v.end(), t.values().begin() + i * per, t.values().begin() + (i + 1) * per);
  return Tensor(t.shape(), std::move(v));
}

}  // namespace

TEST(ModelParams, DefaultWidthCountsWithinFivePercent) {
  const std::vector<std::pair<Variant, double>> want{{Variant::kMvNet, 2.4e6},
                                                     {Variant::kMvaNetA, 3.6e6},
                                                     {Variant::kMvaNetB, 4.8e6},
                                                     {Variant::kTmvaNet, 5.6e6}};
  for (const auto& [v, target] : want) {
    const double n = static_cast<double>(Model(full(v)).parameter_count());
    EXPECT_LE(std::abs(n - target) / target, 0.05) << variant_name(v) << " " << n;
  }
}

TEST(ModelParams, HalfWidthBetweenQuarterAndHalf) {
  for (Variant v : {Variant::kMvNet, Variant::kMvaNetA, Variant::kMvaNetB, Variant::kTmvaNet}) {
    ModelConfig c = full(v);
    const double n1 = static_cast<double>(Model(c).parameter_count());
    c.width = 0.5;
    const double n2 = static_cast<double>(Model(c).parameter_count());
    EXPECT_GT(n2, n1 / 4) << variant_name(v);
    EXPECT_LT(n2, n1 / 2) << variant_name(v);
  }
}

TEST(ModelParams, TableSumsToTotal) {
  Model m(full(Variant::kMvaNetB));
  Index s = 0;
  for (const auto& [layer, n] : m.parameter_table()) s += n;
  EXPECT_EQ(s, m.parameter_count());
}

TEST(ModelParams, UnitAtrousRatesKeepParametersAndShapes) {
  for (Variant v : {Variant::kMvaNetA, Variant::kTmvaNet}) {
    ModelConfig c = full(v);
    Model a(c);
    c.aspp_rates = {1, 1, 1};
    Model b(c);
    EXPECT_EQ(a.parameter_count(), b.parameter_count());
    const auto ta = a.trace_shapes(), tb = b.trace_shapes();
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) {
      EXPECT_EQ(ta[i].name, tb[i].name);
      EXPECT_EQ(ta[i].shape, tb[i].shape);
    }
  }
}

TEST(ModelShapes, EveryVariantMatchesItsLayerTable) {
  for (Variant v : {Variant::kMvNet, Variant::kMvaNetA, Variant::kMvaNetB, Variant::kTmvaNet}) {
    ModelConfig c;
    c.variant = v;
    Model m(c);
    const LayerTableReport r = compare_layer_table(m.trace_shapes(), expected_layer_table(v));
    EXPECT_TRUE(r.ok()) << variant_name(v) << ": " << r.first_mismatch;
    EXPECT_EQ(r.compared, expected_layer_table(v).size());
  }
}

TEST(ModelShapes, TemporalLatentAndDepthCollapse) {
  const auto got = trace_map(Variant::kTmvaNet);
  EXPECT_EQ(got.at("layer8"), (Shape{384, 64, 64}));
  EXPECT_EQ(got.at("ad_layer1"), (Shape{128, 256, 64}));
  EXPECT_EQ(got.at("rd_layer15"), (Shape{4, 256, 64}));
  EXPECT_EQ(got.at("ra_layer15"), (Shape{4, 256, 256}));
}

TEST(ModelConfigErrors, NameTheFirstViolatingLayer) {
  auto message = [](ModelConfig c) -> std::string {
    try {
      Model m(c);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  ModelConfig c = full(Variant::kTmvaNet);
  c.q = 2;
  EXPECT_NE(message(c).find("rd_layer1"), std::string::npos);
  c = full(Variant::kMvNet);
  c.n_range = 250;
  EXPECT_NE(message(c).find("rd_layer4"), std::string::npos);
  c = full(Variant::kMvNet);
  c.n_doppler = 32;
  EXPECT_NE(message(c).find("layer6"), std::string::npos);
  c = full(Variant::kMvaNetB);
  c.n_angle = 128;
  c.n_doppler = 32;
  EXPECT_NE(message(c).find("layer8"), std::string::npos);
  EXPECT_THROW(parse_variant("unet"), ConfigError);
}

TEST(ModelForward, OutputsAreDistributions) {
  Rng rng(1);
  for (Variant v : {Variant::kMvNet, Variant::kMvaNetA, Variant::kMvaNetB, Variant::kTmvaNet}) {
    const ModelConfig c = tiny(v);
    Model m(c, 7);
    NoGradGuard guard;
    const auto out = m.forward(random_batch(c, 2, rng), true);
    EXPECT_EQ(out.p_rd.shape(), (Shape{2, 4, 16, 4}));
    EXPECT_EQ(out.p_ra.shape(), (Shape{2, 4, 16, 16}));
    for (const Tensor* p : {&out.p_rd, &out.p_ra}) {
      const Index bins = p->dim(2) * p->dim(3);
      for (Index b = 0; b < 2; ++b)
        for (Index i = 0; i < bins; ++i) {
          double s = 0;
          for (Index k = 0; k < 4; ++k) {
            const Real x = p->values()[(b * 4 + k) * bins + i];
            ASSERT_GE(x, 0);
            s += x;
          }
          ASSERT_NEAR(s, 1.0, kDoublePrecision ? 1e-12 : 1e-5);
        }
    }
  }
}

TEST(ModelForward, ZeroHeadGivesUniformMaps) {
  const ModelConfig c = tiny(Variant::kMvNet);
  Model m(c, 3);
  for (auto& p : m.parameters()) {
    if (p.name.rfind("rd_layer12.", 0) == 0 || p.name.rfind("ra_layer12.", 0) == 0) {
      Tensor t = p.tensor;
      for (auto& x : t.values()) x = 0;
    }
  }
  Rng rng(2);
  NoGradGuard guard;
  const auto out = m.forward(random_batch(c, 1, rng), false);
  for (Real x : out.p_rd.values()) ASSERT_EQ(x, Real(0.25));
  for (Real x : out.p_ra.values()) ASSERT_EQ(x, Real(0.25));
}

TEST(ModelForward, DeterministicAndPermutationEquivariantInEvalMode) {
  Rng rng(5);
  for (Variant v : {Variant::kMvNet, Variant::kMvaNetB, Variant::kTmvaNet}) {
    const ModelConfig c = tiny(v);
    Model m(c, 11);
    NoGradGuard guard;
    const ModelInput in = random_batch(c, 3, rng);
    const auto a = m.forward(in, false);
    const auto b = m.forward(in, false);
    EXPECT_TRUE(same_values(a.p_rd, b.p_rd));
    EXPECT_TRUE(same_values(a.p_ra, b.p_ra));

    const std::vector<Index> order{2, 0, 1};
    ModelInput perm;
    perm.rd = permute_batch(in.rd, order);
    perm.ra = permute_batch(in.ra, order);
    if (in.ad.defined()) perm.ad = permute_batch(in.ad, order);
    const auto p = m.forward(perm, false);
    EXPECT_TRUE(same_values(p.p_rd, permute_batch(a.p_rd, order)));
    EXPECT_TRUE(same_values(p.p_ra, permute_batch(a.p_ra, order)));

    // A single sample gives the same maps as it does inside the batch.
    ModelInput one;
    one.rd = select_sample(in.rd, 1);
    one.ra = select_sample(in.ra, 1);
    if (in.ad.defined()) one.ad = select_sample(in.ad, 1);
    const auto s = m.forward(one, false);
    const auto ref = select_sample(a.p_ra, 1);
    for (Index i = 0; i < ref.numel(); ++i) {
      ASSERT_NEAR(s.p_ra.values()[i], ref.values()[i], kDoublePrecision ? 1e-12 : 1e-5);
    }
  }
}

TEST(ModelForward, MissingAdInputIsRejected) {
  const ModelConfig c = tiny(Variant::kMvaNetB);
  Model m(c);
  Rng rng(9);
  ModelInput in = random_batch(c, 1, rng);
  in.ad = Tensor();
  NoGradGuard guard;
  EXPECT_THROW(m.forward(in, false), ShapeError);
}

TEST(ModelInit, SameSeedSameParameters) {
  Model a(tiny(Variant::kTmvaNet), 42), b(tiny(Variant::kTmvaNet), 42),
      c(tiny(Variant::kTmvaNet), 43);
  bool differs = false;
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    EXPECT_EQ(a.parameters()[i].name, b.parameters()[i].name);
    EXPECT_TRUE(same_values(a.parameters()[i].tensor, b.parameters()[i].tensor));
    differs = differs ||
              !same_values(a.parameters()[i].tensor, c.parameters()[i].tensor);
  }
  EXPECT_TRUE(differs);
}
