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

#include "radseg/models.hpp"

#include <cmath>
#include <map>

#include "radseg/rng.hpp"

RADSEG_NAMESPACE_BEGIN

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kMvNet: return "mv_net";
    case Variant::kMvaNetA: return "mva_net_a";
    case Variant::kMvaNetB: return "mva_net_b";
    case Variant::kTmvaNet: return "tmva_net";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::kMvNet, Variant::kMvaNetA, Variant::kMvaNetB,
                    Variant::kTmvaNet}) {
    if (variant_name(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name +
                    "' (mv_net, mva_net_a, mva_net_b, tmva_net)");
}

int ModelConfig::frames() const {
  if (q >= 0) return q + 1;
  return temporal() ? 5 : 3;
}

Index ModelConfig::channels() const {
  return static_cast<Index>(std::lround(128.0 * width));
}

bool ModelConfig::uses_ad() const {
  return variant == Variant::kMvaNetB || variant == Variant::kTmvaNet;
}

bool ModelConfig::has_aspp() const { return variant != Variant::kMvNet; }

bool ModelConfig::temporal() const { return variant == Variant::kTmvaNet; }

void ModelConfig::validate() const {
  if (n_classes < 1 || n_classes > 255) {
    throw ConfigError("n_classes must be in [1, 255]");
  }
  if (!(width > 0) || channels() < 1) {
    throw ConfigError("width " + std::to_string(width) + " leaves no channels");
  }
  if (q < -1) throw ConfigError("q must be >= 0");
  if (temporal() && frames() != 5) {
    throw ConfigError("rd_layer1: two 3x3x3 temporal convs need 5 stacked frames "
                      "(q = 4) to collapse depth to 1, got " +
                      std::to_string(frames()));
  }
  if (n_range < 4 || n_angle < 4 || n_doppler < 1) {
    throw ConfigError("rd_layer2: extents too small for two poolings");
  }
  if (n_range % 4 != 0) {
    throw ConfigError("rd_layer4: n_range " + std::to_string(n_range) +
                      " is not divisible by 4");
  }
  if (n_angle % 4 != 0) {
    throw ConfigError("ra_layer4: n_angle " + std::to_string(n_angle) +
                      " is not divisible by 4");
  }
  const std::string latent = has_aspp() ? "layer8" : "layer6";
  if (n_angle / 4 != n_doppler) {
    throw ConfigError(latent + ": rd_layer5 (" + std::to_string(n_range / 4) +
                      " x " + std::to_string(n_doppler) + ") and ra_layer5 (" +
                      std::to_string(n_range / 4) + " x " +
                      std::to_string(n_angle / 4) + ") do not concatenate");
  }
  if (uses_ad() && n_angle != n_range) {
    throw ConfigError(latent + ": ad_layer5 (" + std::to_string(n_angle / 4) +
                      " x " + std::to_string(n_doppler) +
                      ") does not match rd_layer5 (" + std::to_string(n_range / 4) +
                      " x " + std::to_string(n_doppler) + ")");
  }
  if (has_aspp()) {
    if (aspp_rates.empty()) throw ConfigError("rd_layer6: no ASPP rates");
    for (Index r : aspp_rates) {
      if (r < 1) throw ConfigError("rd_layer6: ASPP rates must be >= 1");
    }
  }
}

namespace {

enum class InitKind { kHe, kZero, kOne };

struct ConvBnAct {
  ConvSpec conv;
  BatchNormParams bn;
  bool three_d = false;
};

struct DoubleConv {
  ConvBnAct first;
  ConvBnAct second;
};

struct Aspp {
  ConvSpec pool;  // image-level branch: global average, 1x1 conv, broadcast
  ConvBnAct point;
  std::vector<ConvBnAct> atrous;
};

struct Encoder {
  std::string view;
  DoubleConv block1;
  DoubleConv block2;
  std::array<Index, 2> pool{2, 1};
  ConvSpec proj;
  bool with_aspp = false;
  Aspp aspp;
  ConvSpec fuse;
};

struct Decoder {
  std::string view;
  ConvSpec proj;
  ConvSpec up1;
  DoubleConv block1;
  ConvSpec up2;
  DoubleConv block2;
  ConvSpec head;
};

Shape drop_batch(const Shape& s) { return Shape(s.begin() + 1, s.end()); }

}  // namespace

struct Model::Impl {
  struct Entry {
    std::string name;
    Tensor tensor;
    InitKind kind;
    double fan_in;
  };
  std::vector<Entry> entries;
  std::vector<NamedTensor> buffers;
  std::vector<Encoder> encoders;  // rd, ra, (ad)
  std::vector<Decoder> decoders;  // rd, ra

  void add(const std::string& name, const Tensor& t, InitKind kind,
           double fan_in = 0) {
    entries.push_back({name, t, kind, fan_in});
  }

  void add_conv(const std::string& name, ConvSpec& spec, bool transposed) {
    Index kvol = 1;
    for (Index k : spec.kernel) kvol *= k;
    double fan_in = static_cast<double>(spec.in_channels * kvol);
    if (transposed) {
      Index s = 1;
      for (Index v : spec.stride) s *= v;
      fan_in /= static_cast<double>(s);
    }
    add(name + ".weight", spec.weights, InitKind::kHe, fan_in);
    if (spec.bias.defined()) add(name + ".bias", spec.bias, InitKind::kZero);
  }

  void add_bn(const std::string& name, BatchNormParams& bn) {
    add(name + ".gamma", bn.gamma, InitKind::kOne);
    add(name + ".beta", bn.beta, InitKind::kZero);
    buffers.push_back({name + ".running_mean", bn.running_mean});
    buffers.push_back({name + ".running_var", bn.running_var});
  }

  ConvBnAct make_cba(const std::string& name, Index in, Index out,
                     std::vector<Index> kernel, std::vector<Index> padding,
                     std::vector<Index> dilation = {}) {
    ConvBnAct b;
    b.three_d = kernel.size() == 3;
    // no bias: followed by BN
    b.conv = ConvSpec::make(in, out, std::move(kernel), {}, std::move(padding),
                            std::move(dilation), /*with_bias=*/false);
    b.bn = BatchNormParams::make(out);
    add_conv(name + ".conv", b.conv, false);
    add_bn(name + ".bn", b.bn);
    return b;
  }

  DoubleConv make_double(const std::string& name, Index in, Index out, bool three_d) {
    DoubleConv d;
    if (three_d) {
      d.first = make_cba(name + ".0", in, out, {3, 3, 3}, {0, 1, 1});
      d.second = make_cba(name + ".1", out, out, {3, 3, 3}, {0, 1, 1});
    } else {
      d.first = make_cba(name + ".0", in, out, {3, 3}, {1, 1});
      d.second = make_cba(name + ".1", out, out, {3, 3}, {1, 1});
    }
    return d;
  }

  ConvSpec make_pointwise(const std::string& name, Index in, Index out) {
    ConvSpec s = ConvSpec::make(in, out, {1, 1});
    add_conv(name, s, false);
    return s;
  }

  ConvSpec make_up(const std::string& name, Index in, Index out,
                   std::vector<Index> kernel) {
    std::vector<Index> stride = kernel;
    ConvSpec s = ConvSpec::make(in, out, std::move(kernel), std::move(stride),
                                {0, 0}, {}, true, /*transposed=*/true);
    add_conv(name, s, true);
    return s;
  }

  Aspp make_aspp(const std::string& name, Index c, const std::vector<Index>& rates) {
    Aspp a;
    a.pool = ConvSpec::make(c, c, {1, 1});
    add_conv(name + ".pool", a.pool, false);
    a.point = make_cba(name + ".point", c, c, {1, 1}, {0, 0});
    for (std::size_t i = 0; i < rates.size(); ++i) {
      const Index r = rates[i];
      a.atrous.push_back(make_cba(name + ".atrous" + std::to_string(i), c, c,
                                  {3, 3}, {r, r}, {r, r}));
    }
    return a;
  }
};

namespace {

Tensor run_cba(ConvBnAct& b, const Tensor& x, bool training) {
  Tensor y = b.three_d ? conv3d(x, b.conv) : conv2d(x, b.conv);
  return leaky_relu(batch_norm(y, b.bn, training));
}

Tensor run_double(DoubleConv& d, const Tensor& x, bool training) {
  return run_cba(d.second, run_cba(d.first, x, training), training);
}

Tensor run_aspp(Aspp& a, const Tensor& x, bool training) {
  const Index h = x.dim(2), w = x.dim(3);
  std::vector<Tensor> branches;
  branches.push_back(run_cba(a.point, x, training));
  for (auto& b : a.atrous) branches.push_back(run_cba(b, x, training));
  Tensor g = leaky_relu(conv2d(global_avg_pool(x), a.pool));
  branches.push_back(broadcast_spatial(g, h, w));
  return concat_channels(branches);
}

}  // namespace

Model::Model(ModelConfig config, std::uint64_t seed)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  config_.validate();
  if (config_.q < 0) config_.q = config_.frames() - 1;
  Impl& m = *impl_;
  const Index c = config_.channels();
  const bool aspp = config_.has_aspp();
  const bool temporal = config_.temporal();

  std::vector<std::string> views{"rd", "ra"};
  if (config_.uses_ad()) views.push_back("ad");
  for (const auto& v : views) {
    Encoder e;
    e.view = v;
    const Index in = temporal ? 1 : config_.frames();
    e.block1 = m.make_double(v + "_layer1", in, c, temporal);
    e.block2 = m.make_double(v + "_layer3", c, c, false);
    e.pool = v == "ra" ? std::array<Index, 2>{2, 2} : std::array<Index, 2>{2, 1};
    e.proj = m.make_pointwise(v + "_layer5", c, c);
    e.with_aspp = aspp;
    if (aspp) {
      e.aspp = m.make_aspp(v + "_layer6", c, config_.aspp_rates);
      const Index branches = 2 + static_cast<Index>(config_.aspp_rates.size());
      e.fuse = m.make_pointwise(v + "_layer7", branches * c, c);
    }
    m.encoders.push_back(std::move(e));
  }

  const Index latent = c * static_cast<Index>(views.size());
  const int base = aspp ? 9 : 7;
  for (const std::string v : {"rd", "ra"}) {
    Decoder d;
    d.view = v;
    auto name = [&](int offset) {
      return v + "_layer" + std::to_string(base + offset);
    };
    d.proj = m.make_pointwise(name(0), latent, c);
    // ASPP variants prepend their own fused features and, when present, the
    // AD ones.
    const Index up_in = aspp ? latent : c;
    const std::vector<Index> k = v == "rd" ? std::vector<Index>{2, 1}
                                           : std::vector<Index>{2, 2};
    const int shift = aspp ? 1 : 0;
    d.up1 = m.make_up(name(1 + shift), up_in, c, k);
    d.block1 = m.make_double(name(2 + shift), c, c, false);
    d.up2 = m.make_up(name(3 + shift), c, c, k);
    d.block2 = m.make_double(name(4 + shift), c, c, false);
    d.head = m.make_pointwise(name(5 + shift), c, config_.n_classes);
    m.decoders.push_back(std::move(d));
  }

  for (const auto& e : m.entries) params_.push_back({e.name, e.tensor});
  buffers_ = m.buffers;
  initialize(seed);
}

Model::~Model() = default;
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;

void Model::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& e : impl_->entries) {
    Real* d = e.tensor.data();
    const Index n = e.tensor.numel();
    switch (e.kind) {
      case InitKind::kHe: {
        const double sd = std::sqrt(2.0 / e.fan_in);
        for (Index i = 0; i < n; ++i) d[i] = static_cast<Real>(rng.normal(0, sd));
        break;
      }
      case InitKind::kZero:
        std::fill(d, d + n, Real(0));
        break;
      case InitKind::kOne:
        std::fill(d, d + n, Real(1));
        break;
    }
  }
  for (auto& b : buffers_) {
    const bool var = b.name.ends_with("running_var");
    std::fill(b.tensor.data(), b.tensor.data() + b.tensor.numel(),
              var ? Real(1) : Real(0));
  }
}

void Model::zero_grad() {
  for (auto& p : params_) {
    if (p.tensor.has_grad()) p.tensor.zero_grad();
  }
}

void Model::set_requires_grad(bool on) {
  for (auto& p : params_) p.tensor.set_requires_grad(on);
}

std::vector<std::pair<std::string, Index>> Model::parameter_table() const {
  std::vector<std::pair<std::string, Index>> table;
  for (const auto& p : params_) {
    const std::string layer = p.name.substr(0, p.name.find('.'));
    if (table.empty() || table.back().first != layer) table.emplace_back(layer, 0);
    table.back().second += p.tensor.numel();
  }
  return table;
}

Index Model::parameter_count() const {
  Index n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

SegmentationOutput Model::forward(const ModelInput& in, bool training,
                                  std::vector<LayerTrace>* trace) {
  Impl& m = *impl_;
  const ModelConfig& cfg = config_;
  auto record = [&](const std::string& name, const Tensor& t) {
    if (trace) trace->push_back({name, drop_batch(t.shape())});
  };
  auto check_input = [&](const Tensor& x, const char* view, Index h, Index w) {
    if (!x.defined()) {
      throw ShapeError(std::string("forward: missing ") + view + " input");
    }
    const Shape want = cfg.temporal() ? Shape{x.ndim() > 0 ? x.dim(0) : 0, 1,
                                              cfg.frames(), h, w}
                                      : Shape{x.ndim() > 0 ? x.dim(0) : 0,
                                              cfg.frames(), h, w};
    if (x.shape() != want) {
      throw ShapeError(std::string("forward: ") + view + " input has shape " +
                       to_string(x.shape()) + ", expected " + to_string(want));
    }
  };
  check_input(in.rd, "RD", cfg.n_range, cfg.n_doppler);
  check_input(in.ra, "RA", cfg.n_range, cfg.n_angle);
  if (cfg.uses_ad()) check_input(in.ad, "AD", cfg.n_angle, cfg.n_doppler);
  const Index batch = in.rd.dim(0);
  if (in.ra.dim(0) != batch || (cfg.uses_ad() && in.ad.dim(0) != batch)) {
    throw ShapeError("forward: views disagree in batch size");
  }

  std::vector<Tensor> latents;
  std::map<std::string, Tensor> fused;
  for (auto& e : m.encoders) {
    const Tensor& x = e.view == "rd" ? in.rd : (e.view == "ra" ? in.ra : in.ad);
    const std::string p = e.view + "_layer";
    Tensor h = run_double(e.block1, x, training);
    if (cfg.temporal()) {
      if (h.dim(2) != 1) {
        throw ConfigError(p + "1: temporal depth " + std::to_string(h.dim(2)) +
                          " after the 3D block, expected 1");
      }
      h = reshape(h, Shape{h.dim(0), h.dim(1), h.dim(3), h.dim(4)});
    }
    record(p + "1", h);
    h = maxpool2d(h, e.pool, e.pool);
    record(p + "2", h);
    h = run_double(e.block2, h, training);
    record(p + "3", h);
    h = maxpool2d(h, e.pool, e.pool);
    record(p + "4", h);
    h = conv2d(h, e.proj);
    record(p + "5", h);
    latents.push_back(h);
    if (e.with_aspp) {
      Tensor a = run_aspp(e.aspp, h, training);
      record(p + "6", a);
      a = conv2d(a, e.fuse);
      record(p + "7", a);
      fused[e.view] = a;
    }
  }

  const bool aspp = cfg.has_aspp();
  Tensor latent = concat_channels(latents);
  record(aspp ? "layer8" : "layer6", latent);

  SegmentationOutput out;
  const int base = aspp ? 9 : 7;
  for (auto& d : m.decoders) {
    auto name = [&](int offset) {
      return d.view + "_layer" + std::to_string(base + offset);
    };
    Tensor h = conv2d(latent, d.proj);
    record(name(0), h);
    int shift = 0;
    if (aspp) {
      std::vector<Tensor> parts{fused.at(d.view), h};
      if (fused.count("ad")) parts.push_back(fused.at("ad"));
      h = concat_channels(parts);
      record(name(1), h);
      shift = 1;
    }
    h = conv_transpose2d(h, d.up1);
    record(name(1 + shift), h);
    h = run_double(d.block1, h, training);
    record(name(2 + shift), h);
    h = conv_transpose2d(h, d.up2);
    record(name(3 + shift), h);
    h = run_double(d.block2, h, training);
    record(name(4 + shift), h);
    h = conv2d(h, d.head);
    record(name(5 + shift), h);
    Tensor p = softmax_channels(h);
    (d.view == "rd" ? out.p_rd : out.p_ra) = p;
  }
  return out;
}

std::vector<LayerTrace> Model::trace_shapes() {
  const ModelConfig& cfg = config_;
  auto shape = [&](Index h, Index w) {
    return cfg.temporal() ? Shape{1, 1, cfg.frames(), h, w}
                          : Shape{1, cfg.frames(), h, w};
  };
  ModelInput in;
  in.rd = Tensor::meta(shape(cfg.n_range, cfg.n_doppler));
  in.ra = Tensor::meta(shape(cfg.n_range, cfg.n_angle));
  if (cfg.uses_ad()) in.ad = Tensor::meta(shape(cfg.n_angle, cfg.n_doppler));
  std::vector<LayerTrace> trace;
  NoGradGuard guard;
  forward(in, false, &trace);
  return trace;
}

RADSEG_NAMESPACE_END
