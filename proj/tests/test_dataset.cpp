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

#include <filesystem>
#include <fstream>
#include <iterator>

#include "radseg/dataset.hpp"
#include "radseg/keyvalue.hpp"
#include "radseg/rseg_io.hpp"
#include "test_util.hpp"

using namespace radseg;
using namespace radseg_test;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << s;
}

Sample toy_sample(Rng& rng) {
  // RD 6x4, RA 6x8, AD 8x4 with one object painted coherently in range.
  auto rnd = [&](Shape s) {
    std::vector<Real> v(static_cast<std::size_t>(numel(s)));
    for (auto& x : v) x = static_cast<Real>(rng.uniform());
    return Tensor(s, std::move(v));
  };
  std::vector<std::uint8_t> rd(24, 0), ra(48, 0);
  for (Index r = 1; r < 3; ++r) {
    rd[r * 4 + 1] = 2;
    ra[r * 8 + 5] = 2;
  }
  Sample s;
  s.rd_in = rnd({3, 6, 4});
  s.ra_in = rnd({3, 6, 8});
  s.ad_in = rnd({3, 8, 4});
  s.rd_target = one_hot(rd, 4, 6, 4);
  s.ra_target = one_hot(ra, 4, 6, 8);
  return s;
}

std::vector<bool> range_support(const Tensor& target) {
  const Index k = target.dim(0), h = target.dim(1), w = target.dim(2);
  std::vector<bool> s(static_cast<std::size_t>(h), false);
  for (Index c = 1; c < k; ++c)
    for (Index r = 0; r < h; ++r)
      for (Index j = 0; j < w; ++j)
        if (target.values()[(c * h + r) * w + j] > 0) s[r] = true;
  return s;
}

std::vector<double> class_sums(const Tensor& target) {
  const Index k = target.dim(0), n = target.numel() / k;
  std::vector<double> s(static_cast<std::size_t>(k), 0);
  for (Index c = 0; c < k; ++c)
    for (Index i = 0; i < n; ++i) s[c] += target.values()[c * n + i];
  return s;
}

}  // namespace

TEST(KeyValue, ParsesAndRejectsMalformedInput) {
  const KeyValues kv = parse_key_values("# c\n a = 1 \n\nb=x y\n", "t");
  EXPECT_EQ(kv.at("a"), "1");
  EXPECT_EQ(kv.at("b"), "x y");
  EXPECT_THROW(parse_key_values("novalue\n", "t"), DataError);
  EXPECT_THROW(parse_key_values("=3\n", "t"), DataError);
  EXPECT_THROW(parse_key_values("a=1\na=2\n", "t"), DataError);
  EXPECT_THROW(kv_double(kv, "b"), DataError);
  EXPECT_THROW(kv_get(kv, "missing"), DataError);
  const double v = 0.1 + 0.2;
  EXPECT_EQ(kv_double({{"v", format_double(v)}}, "v"), v);
}

TEST(Rseg, RoundTripIsBitwise) {
  TempDir dir("rseg");
  Rng rng(1);
  Tensor t({2, 3, 4});
  for (auto& v : t.values()) v = static_cast<Real>(rng.normal());
  const auto path = (dir.path / "t.rseg").string();
  save_tensor(path, t);
  const Tensor u = load_tensor(path);
  EXPECT_EQ(u.shape(), t.shape());
  EXPECT_EQ(std::vector<Real>(u.values().begin(), u.values().end()),
            std::vector<Real>(t.values().begin(), t.values().end()));

  const std::vector<std::uint8_t> labels{0, 1, 2, 3, 255};
  save_u8((dir.path / "m.rseg").string(), {5}, labels);
  EXPECT_EQ(read_rseg((dir.path / "m.rseg").string()).to_u8(), labels);
}

TEST(Rseg, FloatPayloadWidensLosslessly) {
  TempDir dir("rseg");
  const std::vector<float> f{1.5f, -3.25f, 1e-30f, 3.4e38f};
  const auto path = (dir.path / "f.rseg").string();
  save_f32(path, {4}, f);
  const auto wide = read_rseg(path).to_f64();
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(wide[i], double(f[i]));
  const Tensor t = load_tensor(path);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(t.values()[i], Real(f[i]));
}

TEST(Rseg, CorruptionIsRejectedWithNamedErrors) {
  TempDir dir("rseg");
  const auto path = dir.path / "c.rseg";
  save_f32(path.string(), {2, 2}, std::vector<float>{1, 2, 3, 4});
  const std::string good = slurp(path);
  auto expect_error = [&](std::string bytes, const std::string& what) {
    spit(path, bytes);
    try {
      read_rseg(path.string());
      ADD_FAILURE() << "accepted: " << what;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find(what), std::string::npos) << e.what();
    }
  };
  std::string bad = good;
  bad[0] = 'X';
  expect_error(bad, "magic");
  bad = good;
  bad[4] = 2;
  expect_error(bad, "version");
  bad = good;
  bad[8] = 9;
  expect_error(bad, "dtype");
  expect_error(good.substr(0, good.size() - 1), "truncated");
  expect_error(good.substr(0, 6), "truncated");
  bad = good;
  bad[12] = 100;
  expect_error(bad, "dim");
  bad = good;
  for (int i = 16; i < 24; ++i) bad[i] = char(0xff);
  expect_error(bad, "overflow");
  expect_error(good + "x", "trailing");
}

TEST(ClassWeights, InverseFrequencyNormalizedToOne) {
  const auto eq = compute_class_weights(std::vector<std::uint64_t>{50, 50});
  EXPECT_DOUBLE_EQ(eq[0], 0.5);
  const auto w = compute_class_weights(std::vector<std::uint64_t>{90, 10});
  EXPECT_NEAR(w[0], 0.1, 1e-15);
  EXPECT_NEAR(w[1], 0.9, 1e-15);
  const auto bg = compute_class_weights(std::vector<std::uint64_t>{100000, 30, 70, 200});
  double total = 0;
  for (double v : bg) total += v;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_LT(bg[0], bg[3]);
  EXPECT_LT(bg[3], bg[2]);
  EXPECT_LT(bg[2], bg[1]);
  try {
    compute_class_weights(std::vector<std::uint64_t>{10, 0, 5, 5});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("pedestrian"), std::string::npos);
  }
}

TEST(Normalize, BoundsClampAndRoundTrip) {
  const ViewStats s{80, 110};
  const std::vector<float> lo(5, 80.f), hi(5, 110.f), out{70.f, 120.f};
  for (Real v : normalize_view(lo, s)) EXPECT_EQ(v, 0);
  for (Real v : normalize_view(hi, s)) EXPECT_EQ(v, 1);
  const auto c = normalize_view(out, s);
  EXPECT_EQ(c[0], 0);
  EXPECT_EQ(c[1], 1);
  const std::vector<float> mid{81.5f, 95.25f, 109.f};
  const auto back = denormalize_view(normalize_view(mid, s), s);
  for (std::size_t i = 0; i < mid.size(); ++i) EXPECT_NEAR(back[i], mid[i], 1e-6 * 30);
  EXPECT_THROW(normalize_view(mid, ViewStats{3, 3}), ConfigError);
}

TEST(Flip, CoinsFalseIsIdentityAndFlipsAreInvolutions) {
  Rng rng(3);
  const Sample s = toy_sample(rng);
  const Sample id = augment_flip(s, FlipFlags{});
  EXPECT_TRUE(same_values(id.rd_in, s.rd_in));
  EXPECT_TRUE(same_values(id.ra_target, s.ra_target));
  for (int mask = 1; mask < 8; ++mask) {
    const FlipFlags f{bool(mask & 1), bool(mask & 2), bool(mask & 4)};
    const Sample twice = augment_flip(augment_flip(s, f), f);
    EXPECT_TRUE(same_values(twice.rd_in, s.rd_in));
    EXPECT_TRUE(same_values(twice.ra_in, s.ra_in));
    EXPECT_TRUE(same_values(twice.ad_in, s.ad_in));
    EXPECT_TRUE(same_values(twice.rd_target, s.rd_target));
    EXPECT_TRUE(same_values(twice.ra_target, s.ra_target));
  }
}

TEST(Flip, PreservesRangeSupportAndClassCounts) {
  Rng rng(4);
  const Sample s = toy_sample(rng);
  for (int mask = 0; mask < 8; ++mask) {
    const FlipFlags f{bool(mask & 1), bool(mask & 2), bool(mask & 4)};
    const Sample o = augment_flip(s, f);
    EXPECT_EQ(range_support(o.rd_target), range_support(o.ra_target));
    EXPECT_EQ(class_sums(o.rd_target), class_sums(s.rd_target));
    EXPECT_EQ(class_sums(o.ra_target), class_sums(s.ra_target));
  }
  // Flipping moves inputs and targets together.
  const Sample r = augment_flip(s, FlipFlags{true, false, false});
  EXPECT_EQ(r.rd_in.values()[0], s.rd_in.values()[5 * 4]);
  EXPECT_TRUE(same_values(r.ad_in, s.ad_in));
}

class SimulatedData : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("dataset");
    SimulateOptions o;
    o.frames = 12;
    o.frames_per_sequence = 4;
    o.val_fraction = 0.34;
    o.test_fraction = 0;
    o.seed = 5;
    o.profile = "small";
    index_ = new DatasetIndex(simulate_dataset(dir_->path.string(), o));
  }
  static void TearDownTestSuite() {
    delete index_;
    delete dir_;
  }
  static TempDir* dir_;
  static DatasetIndex* index_;
};

TempDir* SimulatedData::dir_ = nullptr;
DatasetIndex* SimulatedData::index_ = nullptr;

TEST_F(SimulatedData, IndexRoundTripsAndSplitsAreDisjoint) {
  const DatasetIndex& idx = *index_;
  EXPECT_EQ(idx.sequences.size(), 3u);
  EXPECT_EQ(idx.split("train").size(), 2u);
  EXPECT_EQ(idx.split("val").size(), 1u);
  const DatasetIndex back = DatasetIndex::load(idx.root);
  EXPECT_EQ(back.class_counts, idx.class_counts);
  EXPECT_EQ(back.stats.rd.min, idx.stats.rd.min);
  EXPECT_EQ(back.stats.ra.max, idx.stats.ra.max);
  for (const auto& s : idx.split("train")) {
    for (const auto& v : idx.split("val")) EXPECT_NE(s.name, v.name);
  }
  for (auto c : idx.class_counts) EXPECT_GT(c, 0u);
}

TEST_F(SimulatedData, StatisticsComeFromTheTrainSplitOnly) {
  const SplitData train = load_split(*index_, "train");
  double lo = 1e300, hi = -1e300;
  std::uint64_t bins = 0;
  for (const auto& s : train.sequences)
    for (const auto& f : s.frames) {
      for (float v : f.rd) lo = std::min(lo, double(v)), hi = std::max(hi, double(v));
      bins += f.rd_mask.size() + f.ra_mask.size();
    }
  EXPECT_EQ(lo, index_->stats.rd.min);
  EXPECT_EQ(hi, index_->stats.rd.max);
  std::uint64_t total = 0;
  for (auto c : index_->class_counts) total += c;
  EXPECT_EQ(total, bins);
}

TEST_F(SimulatedData, StackingLayoutsAndOneHotTargets) {
  const SplitData train = load_split(*index_, "train");
  EXPECT_EQ(enumerate_samples(train, 2).size(), 2u * 2u);
  EXPECT_EQ(enumerate_samples(train, 0).size(), 2u * 4u);
  const Sample c = stack_sample(train, {0, 2}, 2, StackLayout::kChannels, index_->stats, 4, false);
  EXPECT_EQ(c.rd_in.shape(), (Shape{3, 64, 16}));
  EXPECT_EQ(c.ra_in.shape(), (Shape{3, 64, 64}));
  EXPECT_FALSE(c.ad_in.defined());
  const Sample d = stack_sample(train, {1, 3}, 3, StackLayout::kDepth, index_->stats, 4, true);
  EXPECT_EQ(d.rd_in.shape(), (Shape{1, 4, 64, 16}));
  EXPECT_EQ(d.ad_in.shape(), (Shape{1, 4, 64, 16}));
  const Sample z = stack_sample(train, {0, 0}, 0, StackLayout::kChannels, index_->stats, 4, false);
  EXPECT_EQ(z.rd_in.dim(0), 1);
  for (const Tensor* t : {&c.rd_target, &c.ra_target}) {
    const Index k = t->dim(0), n = t->numel() / k;
    for (Index i = 0; i < n; ++i) {
      double s = 0;
      for (Index j = 0; j < k; ++j) s += t->values()[j * n + i];
      ASSERT_EQ(s, 1);
    }
  }
  // Most recent frame sits last in the stack.
  const auto& frame = train.sequences[0].frames[2];
  const auto norm = normalize_view(frame.rd, index_->stats.rd);
  for (Index i = 0; i < 64 * 16; ++i) ASSERT_EQ(c.rd_in.values()[2 * 64 * 16 + i], norm[i]);
  const Batch b = collate({c, c});
  EXPECT_EQ(b.rd_in.shape(), (Shape{2, 3, 64, 16}));
  EXPECT_EQ(b.size, 2);
}

TEST_F(SimulatedData, SameSeedGivesByteIdenticalFiles) {
  TempDir other("dataset2");
  SimulateOptions o;
  o.frames = 12;
  o.frames_per_sequence = 4;
  o.val_fraction = 0.34;
  o.test_fraction = 0;
  o.seed = 5;
  o.profile = "small";
  simulate_dataset(other.path.string(), o);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir_->path)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir_->path);
    ASSERT_EQ(slurp(e.path()), slurp(other.path / rel)) << rel;
    ++files;
  }
  EXPECT_EQ(files, 1u + 12u * 5u);
}

TEST_F(SimulatedData, EveryFrameHasConsistentRangeSupport) {
  for (const char* split : {"train", "val"}) {
    const SplitData data = load_split(*index_, split);
    for (const auto& s : data.sequences)
      for (const auto& f : s.frames) {
        std::vector<bool> a(64, false), b(64, false);
        for (Index r = 0; r < 64; ++r) {
          for (Index d = 0; d < 16; ++d) a[r] = a[r] || f.rd_mask[r * 16 + d];
          for (Index c = 0; c < 64; ++c) b[r] = b[r] || f.ra_mask[r * 64 + c];
        }
        EXPECT_EQ(a, b);
      }
  }
}
