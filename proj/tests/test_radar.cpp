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

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "oracles.hpp"
#include "radseg/radar.hpp"

using namespace radseg;
using namespace radseg_test;

namespace {

RadarParams quiet(RadarParams p) {
  p.noise_std = 0;
  return p;
}

PointTarget target_at(const RadarParams& p, double range, double v, double angle) {
  PointTarget t;
  t.range = range;
  t.velocity = v;
  t.angle = angle;
  t.extent = {2, 2, 2};
  (void)p;
  return t;
}

}  // namespace

TEST(Fft, MatchesDirectDftAtSixteen) {
  const OracleReport r = check_fft16(20, 1);
  EXPECT_TRUE(r.ok()) << r.first_failure << " max " << r.max_error;
}

TEST(Fft, StridedAndShifted) {
  std::vector<Complex> x(8 * 3);
  Rng rng(2);
  for (auto& v : x) v = Complex(rng.normal(), rng.normal());
  std::vector<Complex> col(8);
  for (int i = 0; i < 8; ++i) col[i] = x[i * 3 + 1];
  const auto ref = direct_dft(col);
  fft_inplace(x.data() + 1, 8, 3);
  fft_shift(x.data() + 1, 8, 3);
  for (int k = 0; k < 8; ++k) EXPECT_LT(std::abs(x[((k + 4) % 8) * 3 + 1] - ref[k]), 1e-10);
}

TEST(Fft, RejectsNonPowerOfTwo) {
  std::vector<Complex> x(12);
  EXPECT_THROW(fft_inplace(x), ConfigError);
  EXPECT_THROW(fft_chain(RadCube(6, 8, 8)), ConfigError);
}

TEST(RadarParams, BinMappingsAreMonotoneAndInvertible) {
  const RadarParams p = RadarParams::desk();
  EXPECT_LT(p.range_bin(10), p.range_bin(11));
  EXPECT_LT(p.doppler_bin(-1), p.doppler_bin(1));
  EXPECT_LT(p.angle_bin(-0.2), p.angle_bin(0.2));
  EXPECT_NEAR(p.range_of_bin(p.range_bin(17.3)), 17.3, 1e-9);
  EXPECT_NEAR(p.velocity_of_bin(p.doppler_bin(-4.2)), -4.2, 1e-9);
  EXPECT_NEAR(p.angle_of_bin(p.angle_bin(0.3)), 0.3, 1e-9);
  EXPECT_DOUBLE_EQ(p.doppler_bin(0), 16);
  EXPECT_DOUBLE_EQ(p.angle_bin(0), 64);
}

TEST(Synthesis, ZeroTargetsZeroNoiseGiveZeroCube) {
  const RadCube c = synthesize_adc(quiet(RadarParams::small()), {}, 1);
  for (const auto& v : c.values) EXPECT_EQ(v, Complex(0));
  const RadCube f = fft_chain(c);
  for (const auto& v : f.values) EXPECT_EQ(v, Complex(0));
}

TEST(Synthesis, FastTimeFrequencyEncodesRangeBin) {
  const RadarParams p = quiet(RadarParams::small());
  const PointTarget t = target_at(p, 13.0, 0, 0);
  const RadCube c = synthesize_adc(p, {t}, 1);
  const double expected = 2 * std::numbers::pi * p.range_bin(13.0) / double(p.n_range);
  const double step = std::arg(c.at(1, 0, 0) / c.at(0, 0, 0));
  EXPECT_NEAR(std::remainder(step - expected, 2 * std::numbers::pi), 0, 1e-9);
}

TEST(Synthesis, Superposition) {
  const RadarParams p = quiet(RadarParams::small());
  const PointTarget a = target_at(p, 10, 2, 0.1), b = target_at(p, 30, -3, -0.3);
  const RadCube ab = synthesize_adc(p, {a, b}, 1);
  const RadCube ca = synthesize_adc(p, {a}, 1), cb = synthesize_adc(p, {b}, 1);
  for (std::size_t i = 0; i < ab.values.size(); ++i) {
    EXPECT_LT(std::abs(ab.values[i] - (ca.values[i] + cb.values[i])), 1e-9);
  }
}

TEST(Synthesis, CoverageViolationsNameTheBound) {
  const RadarParams p = RadarParams::small();
  auto msg = [&](PointTarget t) {
    try {
      synthesize_adc(p, {t}, 1);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg(target_at(p, 80, 0, 0)).find("range"), std::string::npos);
  EXPECT_NE(msg(target_at(p, 10, 40, 0)).find("velocity"), std::string::npos);
  EXPECT_NE(msg(target_at(p, 10, 0, 2.0)).find("angle"), std::string::npos);
}

TEST(FftChain, PointTargetPeakWithinOneBinOverRandomScenes) {
  const OracleReport r = check_radar_peaks(RadarParams::desk(), 200, 42);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(Speckle, UnitMeanIntensityDeterministicAndMultiplicative) {
  RadCube c(64, 64, 32);
  for (auto& v : c.values) v = Complex(0.6, 0.8);
  const RadCube s = apply_speckle(c, 7);
  double mean = 0;
  for (const auto& v : s.values) mean += std::norm(v);
  mean /= double(s.values.size());
  EXPECT_NEAR(mean, 1.0, 0.02);
  const RadCube s2 = apply_speckle(c, 7);
  EXPECT_EQ(s.values, s2.values);
  const RadCube z = apply_speckle(RadCube(4, 4, 4), 7);
  for (const auto& v : z.values) EXPECT_EQ(std::abs(v), 0);
}

TEST(Aggregate, ConstantModulusCases) {
  RadCube c(8, 8, 4);
  for (auto& v : c.values) v = Complex(0, 1);
  ViewSet views = aggregate_views(c);
  for (double v : views.ra.values) EXPECT_NEAR(v, 0, 1e-12);
  for (double v : views.rd.values) EXPECT_NEAR(v, 0, 1e-12);
  for (double v : views.ad.values) EXPECT_NEAR(v, 0, 1e-12);
  for (auto& v : c.values) v = Complex(3, 0);
  views = aggregate_views(c);
  for (double v : views.ad.values) EXPECT_NEAR(v, 20 * std::log10(3.0), 1e-12);
}

TEST(Aggregate, MatchesDirectSummation) {
  const OracleReport r = check_view_aggregation(10, 3);
  EXPECT_TRUE(r.ok()) << r.first_failure << " max " << r.max_error;
  // Empty cube hits the floor: 10 log10(1e-12) = -120 dB.
  const ViewSet empty = aggregate_views(RadCube(2, 2, 2));
  EXPECT_NEAR(empty.ra.values[0], -120, 1e-9);
}

TEST(Masks, EmptySharedRangeSupportAndClipping) {
  const RadarParams p = RadarParams::desk();
  auto [rd0, ra0] = render_masks(p, {});
  EXPECT_TRUE(std::all_of(rd0.labels.begin(), rd0.labels.end(), [](auto v) { return v == 0; }));
  EXPECT_TRUE(std::all_of(ra0.labels.begin(), ra0.labels.end(), [](auto v) { return v == 0; }));

  auto range_support = [](const LabelMap& m) {
    std::vector<bool> s(static_cast<std::size_t>(m.rows), false);
    for (Index r = 0; r < m.rows; ++r)
      for (Index c = 0; c < m.cols; ++c)
        if (m.at(r, c)) s[r] = true;
    return s;
  };
  PointTarget car = target_at(p, p.max_range / 2, 0, 0);
  car.extent = {5, 1, 5};
  auto [rd, ra] = render_masks(p, {car});
  EXPECT_EQ(range_support(rd), range_support(ra));

  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    PointTarget t;
    t.range = rng.coin() ? 0.0 : p.range_of_bin(double(p.n_range - 1));
    t.velocity = (rng.coin() ? -0.999 : 0.999) * p.velocity_of_bin(double(p.n_doppler - 1));
    t.angle = (rng.coin() ? -1 : 1) * std::asin(0.99);
    t.extent = {Index(1 + rng.below(6)), Index(1 + rng.below(6)), Index(1 + rng.below(6))};
    auto [a, b] = render_masks(p, {t});
    EXPECT_EQ(a.labels.size(), std::size_t(p.n_range * p.n_doppler));
    EXPECT_EQ(range_support(a), range_support(b));
  }
}

TEST(Sequence, StaticTargetHasIdenticalMasks) {
  const RadarParams p = RadarParams::small();
  Scenario sc;
  sc.objects.push_back(make_object(p, ObjectClass::kCyclist, 20, 0, 0.1));
  const auto seq = simulate_sequence(p, sc, 4, 9);
  for (const auto& f : seq.frames) {
    EXPECT_EQ(f.rd_mask.labels, seq.frames[0].rd_mask.labels);
    EXPECT_EQ(f.ra_mask.labels, seq.frames[0].ra_mask.labels);
  }
}

TEST(Sequence, RangeAdvancesAtTheAnalyticRate) {
  const RadarParams p = RadarParams::desk();
  Scenario sc;
  const double v = 6.0, r0 = 12.0;
  sc.objects.push_back(make_object(p, ObjectClass::kCar, r0, v, 0));
  const auto seq = simulate_sequence(p, sc, 6, 5);
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const auto& m = seq.frames[f].rd_mask;
    Index lo = m.rows, hi = -1;
    for (Index r = 0; r < m.rows; ++r)
      for (Index c = 0; c < m.cols; ++c)
        if (m.at(r, c)) lo = std::min(lo, r), hi = std::max(hi, r);
    const double expected = p.range_bin(r0 + v * sc.frame_period * double(f));
    EXPECT_EQ((lo + hi) / 2, std::lround(expected)) << "frame " << f;
  }
}

TEST(Sequence, DeterministicUnderSeedAndDropsExitingTargets) {
  const RadarParams p = RadarParams::small();
  Scenario sc;
  sc.objects.push_back(make_object(p, ObjectClass::kPedestrian, 15, 1.5, -0.2));
  const auto a = simulate_sequence(p, sc, 3, 21), b = simulate_sequence(p, sc, 3, 21);
  for (std::size_t f = 0; f < 3; ++f) {
    EXPECT_EQ(a.frames[f].views.rd.values, b.frames[f].views.rd.values);
    EXPECT_EQ(a.frames[f].views.ra.values, b.frames[f].views.ra.values);
  }
  Scenario leaving;
  leaving.objects.push_back(make_object(p, ObjectClass::kCar, p.max_range - 1.5, 10, 0));
  const auto c = simulate_sequence(p, leaving, 4, 1);
  EXPECT_FALSE(c.events.empty());
  const auto& last = c.frames.back().rd_mask.labels;
  EXPECT_TRUE(std::all_of(last.begin(), last.end(), [](auto v) { return v == 0; }));
}

TEST(Views, DataVolumeRatioAtDefaultExtents) {
  const RadarParams p = RadarParams::full();
  EXPECT_EQ(p.cube_elements(), 256 * 256 * 64);
  EXPECT_EQ(p.view_elements(), 256 * 64 + 256 * 64 + 256 * 256);
  const double ratio = double(p.cube_elements()) / double(p.view_elements());
  EXPECT_DOUBLE_EQ(ratio, 128.0 / 3.0);
}
