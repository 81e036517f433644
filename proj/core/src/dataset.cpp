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

#include "radseg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "radseg/keyvalue.hpp"
#include "radseg/metrics.hpp"
#include "radseg/ops.hpp"
#include "radseg/rseg_io.hpp"

RADSEG_NAMESPACE_BEGIN

namespace fs = std::filesystem;

namespace {

std::string padded(Index v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*lld", width, static_cast<long long>(v));
  return buf;
}

void update_stats(ViewStats& s, const std::vector<float>& v) {
  for (float x : v) {
    s.min = std::min(s.min, static_cast<double>(x));
    s.max = std::max(s.max, static_cast<double>(x));
  }
}

std::vector<float> to_float(const Map2D& m) {
  return std::vector<float>(m.values.begin(), m.values.end());
}

}  // namespace

void ViewStats::validate(const std::string& view) const {
  if (!(max > min)) {
    throw ConfigError("normalization: degenerate " + view +
                      " statistics (max == min)");
  }
}

std::vector<SequenceRecord> DatasetIndex::split(const std::string& name) const {
  std::vector<SequenceRecord> out;
  for (const auto& s : sequences) {
    if (s.split == name) out.push_back(s);
  }
  return out;
}

std::string DatasetIndex::sequence_dir(const SequenceRecord& s) const {
  return (fs::path(root) / s.split / s.name).string();
}

std::string DatasetIndex::frame_prefix(const SequenceRecord& s, Index t) const {
  return (fs::path(sequence_dir(s)) / ("frame_" + padded(t, 4))).string();
}

void DatasetIndex::save() const {
  KeyValues kv;
  kv["format"] = "radseg-dataset";
  kv["version"] = "1";
  kv["profile"] = profile;
  kv["n_range"] = std::to_string(n_range);
  kv["n_angle"] = std::to_string(n_angle);
  kv["n_doppler"] = std::to_string(n_doppler);
  kv["n_classes"] = std::to_string(n_classes);
  kv["seed"] = std::to_string(seed);
  kv["sequence_count"] = std::to_string(sequences.size());
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const auto& s = sequences[i];
    kv["sequence." + padded(static_cast<Index>(i), 3)] =
        s.split + "/" + s.name + "/" + std::to_string(s.frames);
  }
  const std::pair<const char*, const ViewStats*> views[] = {
      {"rd", &stats.rd}, {"ra", &stats.ra}, {"ad", &stats.ad}};
  for (const auto& [name, st] : views) {
    kv[std::string("stats.") + name + ".min"] = format_double(st->min);
    kv[std::string("stats.") + name + ".max"] = format_double(st->max);
  }
  for (std::size_t k = 0; k < class_counts.size(); ++k) {
    kv["class_count." + std::to_string(k)] = std::to_string(class_counts[k]);
  }
  fs::create_directories(root);
  write_key_values((fs::path(root) / "meta.txt").string(), kv);
}

DatasetIndex DatasetIndex::load(const std::string& root) {
  const auto path = (fs::path(root) / "meta.txt").string();
  if (!fs::exists(path)) throw DataError("dataset: no meta.txt under " + root);
  const KeyValues kv = read_key_values(path);
  if (kv_get(kv, "format") != "radseg-dataset") {
    throw DataError("dataset: " + path + " is not a radseg dataset index");
  }
  if (kv_index(kv, "version") != 1) throw DataError("dataset: unsupported version");
  DatasetIndex idx;
  idx.root = root;
  idx.profile = kv_get(kv, "profile");
  idx.n_range = kv_index(kv, "n_range");
  idx.n_angle = kv_index(kv, "n_angle");
  idx.n_doppler = kv_index(kv, "n_doppler");
  idx.n_classes = static_cast<int>(kv_index(kv, "n_classes"));
  idx.seed = kv_u64(kv, "seed");
  const Index count = kv_index(kv, "sequence_count");
  for (Index i = 0; i < count; ++i) {
    const std::string& v = kv_get(kv, "sequence." + padded(i, 3));
    const auto a = v.find('/');
    const auto b = v.rfind('/');
    if (a == std::string::npos || a == b) {
      throw DataError("dataset: malformed sequence entry '" + v + "'");
    }
    SequenceRecord s;
    s.split = v.substr(0, a);
    s.name = v.substr(a + 1, b - a - 1);
    s.frames = std::stoll(v.substr(b + 1));
    idx.sequences.push_back(s);
  }
  idx.stats.rd = {kv_double(kv, "stats.rd.min"), kv_double(kv, "stats.rd.max")};
  idx.stats.ra = {kv_double(kv, "stats.ra.min"), kv_double(kv, "stats.ra.max")};
  idx.stats.ad = {kv_double(kv, "stats.ad.min"), kv_double(kv, "stats.ad.max")};
  for (int k = 0; k < idx.n_classes; ++k) {
    idx.class_counts.push_back(kv_u64(kv, "class_count." + std::to_string(k)));
  }
  return idx;
}

std::vector<double> compute_class_weights(const std::vector<std::uint64_t>& counts) {
  if (counts.empty()) throw DataError("class weights: no classes");
  std::vector<double> w(counts.size());
  double total = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) {
      const std::string name =
          k < kClassNames.size() ? kClassNames[k] : "class " + std::to_string(k);
      throw DataError("class weights: class '" + name +
                      "' never occurs in the train split");
    }
    w[k] = 1.0 / static_cast<double>(counts[k]);
    total += w[k];
  }
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> compute_class_weights(const DatasetIndex& index) {
  return compute_class_weights(index.class_counts);
}

std::vector<Real> normalize_view(std::span<const float> values, const ViewStats& s) {
  s.validate("view");
  const double range = s.max - s.min;
  std::vector<Real> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = (static_cast<double>(values[i]) - s.min) / range;
    out[i] = static_cast<Real>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

std::vector<double> denormalize_view(std::span<const Real> values, const ViewStats& s) {
  s.validate("view");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = s.min + static_cast<double>(values[i]) * (s.max - s.min);
  }
  return out;
}

SplitData load_split(const DatasetIndex& index, const std::string& split) {
  SplitData data;
  data.n_range = index.n_range;
  data.n_angle = index.n_angle;
  data.n_doppler = index.n_doppler;
  const Index nr = index.n_range, na = index.n_angle, nd = index.n_doppler;
  auto check = [](const RsegArray& a, const Shape& want, const std::string& path) {
    if (a.dims != want) {
      throw DataError("dataset: " + path + " has shape " + to_string(a.dims) +
                      ", expected " + to_string(want));
    }
  };
  for (const auto& rec : index.split(split)) {
    SequenceData seq;
    seq.name = rec.name;
    for (Index t = 0; t < rec.frames; ++t) {
      const std::string prefix = index.frame_prefix(rec, t);
      FrameData f;
      auto load_view = [&](const char* ext, const Shape& want) {
        const std::string path = prefix + ext;
        RsegArray a = read_rseg(path);
        check(a, want, path);
        return a;
      };
      f.rd = load_view(".rd.rseg", {nr, nd}).to_f32();
      f.ra = load_view(".ra.rseg", {nr, na}).to_f32();
      f.ad = load_view(".ad.rseg", {na, nd}).to_f32();
      f.rd_mask = load_view(".rdmask.rseg", {nr, nd}).to_u8();
      f.ra_mask = load_view(".ramask.rseg", {nr, na}).to_u8();
      for (auto* m : {&f.rd_mask, &f.ra_mask}) {
        for (std::uint8_t c : *m) {
          if (c >= index.n_classes) {
            throw DataError("dataset: label " + std::to_string(c) + " in " +
                            prefix + " exceeds n_classes");
          }
        }
      }
      seq.frames.push_back(std::move(f));
    }
    data.sequences.push_back(std::move(seq));
  }
  return data;
}

std::vector<SampleRef> enumerate_samples(const SplitData& data, int q) {
  if (q < 0) throw ConfigError("q must be >= 0");
  std::vector<SampleRef> refs;
  for (std::size_t s = 0; s < data.sequences.size(); ++s) {
    const auto n = static_cast<Index>(data.sequences[s].frames.size());
    for (Index t = q; t < n; ++t) refs.push_back({s, t});
  }
  return refs;
}

Tensor one_hot(std::span<const std::uint8_t> labels, int n_classes, Index rows,
               Index cols) {
  const Index bins = rows * cols;
  if (static_cast<Index>(labels.size()) != bins) {
    throw ShapeError("one_hot: label count does not match extents");
  }
  Tensor y(Shape{n_classes, rows, cols});
  Real* d = y.data();
  for (Index i = 0; i < bins; ++i) {
    if (labels[i] >= n_classes) throw DataError("one_hot: label out of range");
    d[labels[i] * bins + i] = Real(1);
  }
  return y;
}

Sample stack_sample(const SequenceData& seq, Index t, int q, StackLayout layout,
                    const NormStats& stats, int n_classes, bool with_ad,
                    Index n_range, Index n_angle, Index n_doppler) {
  if (q < 0) throw ConfigError("q must be >= 0");
  if (t < q || t >= static_cast<Index>(seq.frames.size())) {
    throw ConfigError("stack_sample: frame " + std::to_string(t) +
                      " has no full history of " + std::to_string(q) + " frames");
  }
  const Index frames = q + 1;
  auto stack = [&](auto member, const ViewStats& st, Index h, Index w) {
    std::vector<Real> v;
    v.reserve(static_cast<std::size_t>(frames * h * w));
    for (Index f = t - q; f <= t; ++f) {
      const auto& src = seq.frames[f].*member;
      if (static_cast<Index>(src.size()) != h * w) {
        throw DataError("stack_sample: view size mismatch in " + seq.name);
      }
      const auto n = normalize_view(src, st);
      v.insert(v.end(), n.begin(), n.end());
    }
    Shape shape = layout == StackLayout::kDepth ? Shape{1, frames, h, w}
                                                : Shape{frames, h, w};
    return Tensor(std::move(shape), std::move(v));
  };
  Sample s;
  s.rd_in = stack(&FrameData::rd, stats.rd, n_range, n_doppler);
  s.ra_in = stack(&FrameData::ra, stats.ra, n_range, n_angle);
  if (with_ad) s.ad_in = stack(&FrameData::ad, stats.ad, n_angle, n_doppler);
  const auto& cur = seq.frames[t];
  s.rd_target = one_hot(cur.rd_mask, n_classes, n_range, n_doppler);
  s.ra_target = one_hot(cur.ra_mask, n_classes, n_range, n_angle);
  return s;
}

Sample stack_sample(const SplitData& data, const SampleRef& ref, int q,
                    StackLayout layout, const NormStats& stats, int n_classes,
                    bool with_ad) {
  return stack_sample(data.sequences.at(ref.sequence), ref.t, q, layout, stats,
                      n_classes, with_ad, data.n_range, data.n_angle,
                      data.n_doppler);
}

FlipFlags draw_flips(Rng& rng) {
  FlipFlags f;
  f.range = rng.coin();
  f.doppler = rng.coin();
  f.angle = rng.coin();
  return f;
}

Sample augment_flip(const Sample& s, const FlipFlags& flags) {
  NoGradGuard guard;
  Sample o = s;
  // Views and targets end in (H, W): RD (range, Doppler), RA (range, angle),
  // AD (angle, Doppler).
  if (flags.range) {
    o.rd_in = flip(o.rd_in, -2);
    o.ra_in = flip(o.ra_in, -2);
    o.rd_target = flip(o.rd_target, -2);
    o.ra_target = flip(o.ra_target, -2);
  }
  if (flags.doppler) {
    o.rd_in = flip(o.rd_in, -1);
    if (o.ad_in.defined()) o.ad_in = flip(o.ad_in, -1);
    o.rd_target = flip(o.rd_target, -1);
  }
  if (flags.angle) {
    o.ra_in = flip(o.ra_in, -1);
    if (o.ad_in.defined()) o.ad_in = flip(o.ad_in, -2);
    o.ra_target = flip(o.ra_target, -1);
  }
  return o;
}

Sample augment_flip(const Sample& s, Rng& rng) {
  return augment_flip(s, draw_flips(rng));
}

namespace {

Tensor stack_batch(const std::vector<Sample>& samples, Tensor Sample::*member) {
  const Tensor& first = samples.front().*member;
  if (!first.defined()) return Tensor();
  Shape shape = first.shape();
  const Index per = first.numel();
  std::vector<Real> v;
  v.reserve(static_cast<std::size_t>(per) * samples.size());
  for (const auto& s : samples) {
    const Tensor& t = s.*member;
    if (!t.defined() || t.shape() != shape) {
      throw ShapeError("collate: samples disagree in shape");
    }
    v.insert(v.end(), t.values().begin(), t.values().end());
  }
  shape.insert(shape.begin(), static_cast<Index>(samples.size()));
  return Tensor(std::move(shape), std::move(v));
}

}  // namespace

Batch collate(const std::vector<Sample>& samples) {
  if (samples.empty()) throw ConfigError("collate: empty batch");
  Batch b;
  b.rd_in = stack_batch(samples, &Sample::rd_in);
  b.ra_in = stack_batch(samples, &Sample::ra_in);
  b.ad_in = stack_batch(samples, &Sample::ad_in);
  b.rd_target = stack_batch(samples, &Sample::rd_target);
  b.ra_target = stack_batch(samples, &Sample::ra_target);
  b.size = static_cast<Index>(samples.size());
  return b;
}

DatasetIndex simulate_dataset(const std::string& root, const SimulateOptions& opt,
                              std::vector<std::string>* events) {
  if (opt.frames < 1) throw ConfigError("simulate: frames must be >= 1");
  if (opt.frames_per_sequence < 1) {
    throw ConfigError("simulate: frames per sequence must be >= 1");
  }
  if (opt.val_fraction < 0 || opt.test_fraction < 0 ||
      opt.val_fraction + opt.test_fraction >= 1) {
    throw ConfigError("simulate: split fractions must leave room for train");
  }
  const RadarParams radar = RadarParams::profile(opt.profile);

  DatasetIndex idx;
  idx.root = root;
  idx.profile = opt.profile;
  idx.n_range = radar.n_range;
  idx.n_angle = radar.n_angle;
  idx.n_doppler = radar.n_doppler;
  idx.n_classes = kNumClasses;
  idx.seed = opt.seed;

  const Index n_seq =
      (opt.frames + opt.frames_per_sequence - 1) / opt.frames_per_sequence;
  const auto n_val = static_cast<Index>(std::floor(n_seq * opt.val_fraction));
  const auto n_test = static_cast<Index>(std::floor(n_seq * opt.test_fraction));
  const Index n_train = n_seq - n_val - n_test;

  const double inf = std::numeric_limits<double>::infinity();
  ViewStats rd{inf, -inf}, ra{inf, -inf}, ad{inf, -inf};
  std::vector<std::uint64_t> counts(kNumClasses, 0);

  Index remaining = opt.frames;
  for (Index i = 0; i < n_seq; ++i) {
    SequenceRecord rec;
    rec.split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    rec.name = "seq_" + padded(i, 3);
    rec.frames = std::min(remaining, opt.frames_per_sequence);
    remaining -= rec.frames;

    const std::uint64_t seq_seed = derive_seed(opt.seed, static_cast<std::uint64_t>(i));
    Rng rng(seq_seed);
    // Train sequences cycle the class of their first object.
    const ObjectClass first =
        rec.split == "train" ? static_cast<ObjectClass>(1 + i % 3)
                             : ObjectClass::kBackground;
    const Scenario scenario = random_scenario(radar, rng, rec.frames, first);
    const SimulatedSequence sim =
        simulate_sequence(radar, scenario, rec.frames, derive_seed(seq_seed, 1));
    if (events) {
      for (const auto& e : sim.events) events->push_back(rec.name + ": " + e);
    }

    fs::create_directories(idx.sequence_dir(rec));
    for (Index t = 0; t < rec.frames; ++t) {
      const ViewFrame& fr = sim.frames[t];
      const std::string prefix = idx.frame_prefix(rec, t);
      const auto vrd = to_float(fr.views.rd);
      const auto vra = to_float(fr.views.ra);
      const auto vad = to_float(fr.views.ad);
      save_f32(prefix + ".rd.rseg", {radar.n_range, radar.n_doppler}, vrd);
      save_f32(prefix + ".ra.rseg", {radar.n_range, radar.n_angle}, vra);
      save_f32(prefix + ".ad.rseg", {radar.n_angle, radar.n_doppler}, vad);
      save_u8(prefix + ".rdmask.rseg", {radar.n_range, radar.n_doppler},
              fr.rd_mask.labels);
      save_u8(prefix + ".ramask.rseg", {radar.n_range, radar.n_angle},
              fr.ra_mask.labels);
      if (rec.split == "train") {
        update_stats(rd, vrd);
        update_stats(ra, vra);
        update_stats(ad, vad);
        for (std::uint8_t c : fr.rd_mask.labels) ++counts[c];
        for (std::uint8_t c : fr.ra_mask.labels) ++counts[c];
      }
    }
    idx.sequences.push_back(rec);
  }
  idx.stats = {rd, ra, ad};
  idx.class_counts = counts;
  idx.save();
  return idx;
}

RADSEG_NAMESPACE_END
