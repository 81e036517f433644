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

#include "radseg/train.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

#include "radseg/png_io.hpp"
#include "radseg/rseg_io.hpp"

RADSEG_NAMESPACE_BEGIN

namespace fs = std::filesystem;

namespace {

const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{
      "variant",        "q",              "width",
      "batch_size",     "epochs",         "lr",
      "lr_decay_gamma", "lr_decay_every", "adam_beta1",
      "adam_beta2",     "adam_eps",       "weight_wce",
      "weight_sdice",   "weight_col",     "seed",
      "checkpoint_every", "augment",      "target_train_miou",
      "train_eval_every"};
  return keys;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError("config: " + key + " must be true/false, got '" + v + "'");
}

StackLayout layout_of(const ModelConfig& m) {
  return m.temporal() ? StackLayout::kDepth : StackLayout::kChannels;
}

ModelConfig model_config(const TrainConfig& c, const DatasetIndex& data) {
  ModelConfig m;
  m.variant = c.variant;
  m.q = c.q;
  m.width = c.width;
  m.n_classes = data.n_classes;
  m.n_range = data.n_range;
  m.n_angle = data.n_angle;
  m.n_doppler = data.n_doppler;
  m.validate();
  if (m.q < 0) m.q = m.frames() - 1;
  return m;
}

void check_extents(const ModelConfig& m, const DatasetIndex& data) {
  if (m.n_range != data.n_range || m.n_angle != data.n_angle ||
      m.n_doppler != data.n_doppler || m.n_classes != data.n_classes) {
    throw ConfigError(
        "checkpoint extents " + std::to_string(m.n_range) + "x" +
        std::to_string(m.n_angle) + "x" + std::to_string(m.n_doppler) + " (" +
        std::to_string(m.n_classes) + " classes) do not match dataset " +
        std::to_string(data.n_range) + "x" + std::to_string(data.n_angle) + "x" +
        std::to_string(data.n_doppler) + " (" + std::to_string(data.n_classes) +
        " classes)");
  }
}

std::vector<Tensor> param_tensors(const Model& m) {
  std::vector<Tensor> out;
  for (const auto& p : m.parameters()) out.push_back(p.tensor);
  return out;
}

std::vector<Real> to_real(const std::vector<double>& v) {
  return std::vector<Real>(v.begin(), v.end());
}

template <typename T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& bytes, std::size_t& pos, const std::string& path) {
  if (bytes.size() - pos < sizeof(T)) {
    throw DataError("checkpoint: truncated " + path);
  }
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string take_bytes(const std::string& bytes, std::size_t& pos, std::uint64_t n,
                       const std::string& path) {
  if (bytes.size() - pos < n) throw DataError("checkpoint: truncated " + path);
  std::string s = bytes.substr(pos, static_cast<std::size_t>(n));
  pos += static_cast<std::size_t>(n);
  return s;
}

constexpr char kCkptMagic[4] = {'R', 'C', 'K', 'P'};
constexpr std::uint32_t kCkptVersion = 1;

const Tensor& find_tensor(const Checkpoint& c, const std::string& name) {
  for (const auto& t : c.tensors) {
    if (t.name == name) return t.tensor;
  }
  throw DataError("checkpoint: missing tensor " + name);
}

void copy_into(Tensor& dst, const Tensor& src, const std::string& name) {
  if (dst.shape() != src.shape()) {
    throw ShapeError("checkpoint: " + name + " has shape " + to_string(src.shape()) +
                     ", model expects " + to_string(dst.shape()));
  }
  std::copy(src.values().begin(), src.values().end(), dst.values().begin());
}

std::string csv_header() {
  return "epoch,lr,loss,wce_rd,wce_ra,sdice_rd,sdice_ra,col,val_miou_rd,"
         "val_miou_ra,val_mdice_rd,val_mdice_ra,val_coherence,train_miou_rd,"
         "train_miou_ra,seconds";
}

}  // namespace

// ---------------------------------------------------------------- config

void TrainConfig::validate() const {
  if (!(lr > 0)) throw ConfigError("config: lr must be > 0");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("config: epochs must be >= 0");
  if (!(lr_decay_gamma > 0 && lr_decay_gamma <= 1)) {
    throw ConfigError("config: lr_decay_gamma must lie in (0, 1]");
  }
  if (lr_decay_every < 1) throw ConfigError("config: lr_decay_every must be >= 1");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1)) {
    throw ConfigError("config: adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0)) throw ConfigError("config: adam_eps must be > 0");
  if (!(weight_wce >= 0) || !(weight_sdice >= 0) || !(weight_col >= 0)) {
    throw ConfigError("config: loss weights must be >= 0");
  }
  if (!(width > 0)) throw ConfigError("config: width must be > 0");
  if (checkpoint_every < 1) throw ConfigError("config: checkpoint_every must be >= 1");
  if (train_eval_every < 1) throw ConfigError("config: train_eval_every must be >= 1");
  if (!(target_train_miou >= 0 && target_train_miou <= 100)) {
    throw ConfigError("config: target_train_miou must lie in [0, 100]");
  }
}

double TrainConfig::lr_at(Index epoch) const {
  double v = lr;
  for (Index k = 0; k < epoch / lr_decay_every; ++k) v *= lr_decay_gamma;
  return v;
}

KeyValues TrainConfig::to_key_values() const {
  KeyValues kv;
  kv["variant"] = variant_name(variant);
  kv["q"] = std::to_string(q);
  kv["width"] = format_double(width);
  kv["batch_size"] = std::to_string(batch_size);
  kv["epochs"] = std::to_string(epochs);
  kv["lr"] = format_double(lr);
  kv["lr_decay_gamma"] = format_double(lr_decay_gamma);
  kv["lr_decay_every"] = std::to_string(lr_decay_every);
  kv["adam_beta1"] = format_double(adam_beta1);
  kv["adam_beta2"] = format_double(adam_beta2);
  kv["adam_eps"] = format_double(adam_eps);
  kv["weight_wce"] = format_double(weight_wce);
  kv["weight_sdice"] = format_double(weight_sdice);
  kv["weight_col"] = format_double(weight_col);
  kv["seed"] = std::to_string(seed);
  kv["checkpoint_every"] = std::to_string(checkpoint_every);
  kv["augment"] = augment ? "true" : "false";
  kv["target_train_miou"] = format_double(target_train_miou);
  kv["train_eval_every"] = std::to_string(train_eval_every);
  return kv;
}

TrainConfig TrainConfig::from_key_values(const KeyValues& kv) {
  for (const auto& [k, v] : kv) {
    if (!config_keys().count(k)) throw ConfigError("config: unknown key '" + k + "'");
  }
  TrainConfig c;
  auto has = [&](const char* k) { return kv.count(k) > 0; };
  try {
    if (has("variant")) c.variant = parse_variant(kv.at("variant"));
    if (has("q")) c.q = static_cast<int>(kv_index(kv, "q"));
    if (has("width")) c.width = kv_double(kv, "width");
    if (has("batch_size")) c.batch_size = kv_index(kv, "batch_size");
    if (has("epochs")) c.epochs = kv_index(kv, "epochs");
    if (has("lr")) c.lr = kv_double(kv, "lr");
    if (has("lr_decay_gamma")) c.lr_decay_gamma = kv_double(kv, "lr_decay_gamma");
    if (has("lr_decay_every")) c.lr_decay_every = kv_index(kv, "lr_decay_every");
    if (has("adam_beta1")) c.adam_beta1 = kv_double(kv, "adam_beta1");
    if (has("adam_beta2")) c.adam_beta2 = kv_double(kv, "adam_beta2");
    if (has("adam_eps")) c.adam_eps = kv_double(kv, "adam_eps");
    if (has("weight_wce")) c.weight_wce = kv_double(kv, "weight_wce");
    if (has("weight_sdice")) c.weight_sdice = kv_double(kv, "weight_sdice");
    if (has("weight_col")) c.weight_col = kv_double(kv, "weight_col");
    if (has("seed")) c.seed = kv_u64(kv, "seed");
    if (has("checkpoint_every")) c.checkpoint_every = kv_index(kv, "checkpoint_every");
    if (has("augment")) c.augment = parse_bool("augment", kv.at("augment"));
    if (has("target_train_miou")) c.target_train_miou = kv_double(kv, "target_train_miou");
    if (has("train_eval_every")) c.train_eval_every = kv_index(kv, "train_eval_every");
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
  return from_key_values(read_key_values(path));
}

// ---------------------------------------------------------------- adam

void adam_step(const std::vector<Tensor>& params, AdamState& state, double lr) {
  if (state.m.empty() && state.v.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(static_cast<std::size_t>(p.numel()), Real(0));
      state.v.emplace_back(static_cast<std::size_t>(p.numel()), Real(0));
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam: state holds " + std::to_string(state.m.size()) +
                     " moments for " + std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto n = static_cast<std::size_t>(params[i].numel());
    if (state.m[i].size() != n || state.v[i].size() != n) {
      throw ShapeError("adam: moment " + std::to_string(i) + " does not match " +
                       to_string(params[i].shape()));
    }
  }
  ++state.step;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor p = params[i];
    Real* w = p.data();
    const bool has_g = p.has_grad();
    const Real* g = has_g ? p.grad().data() : nullptr;
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      const double gj = has_g ? static_cast<double>(g[j]) : 0.0;
      const double mj = b1 * m[j] + (1 - b1) * gj;
      const double vj = b2 * v[j] + (1 - b2) * gj * gj;
      m[j] = static_cast<Real>(mj);
      v[j] = static_cast<Real>(vj);
      const double mh = static_cast<double>(m[j]) / c1;
      const double vh = static_cast<double>(v[j]) / c2;
      w[j] = static_cast<Real>(w[j] - lr * mh / (std::sqrt(vh) + state.eps));
    }
  }
}

// ---------------------------------------------------------------- evaluate

EvalReport evaluate(Model& model, const SplitData& data, const NormStats& stats,
                    Index batch_size, const std::string& export_dir) {
  if (batch_size < 1) throw ConfigError("evaluate: batch_size must be >= 1");
  const ModelConfig& mc = model.config();
  if (data.n_range != mc.n_range || data.n_angle != mc.n_angle ||
      data.n_doppler != mc.n_doppler) {
    throw ConfigError("evaluate: split extents do not match the model");
  }
  NoGradGuard no_grad;
  EvalReport report;
  report.rd_counts = ConfusionAccumulator(mc.n_classes);
  report.ra_counts = ConfusionAccumulator(mc.n_classes);
  const auto refs = enumerate_samples(data, mc.q);
  const Index rd_bins = mc.n_range * mc.n_doppler;
  const Index ra_bins = mc.n_range * mc.n_angle;
  double coherence_sum = 0;
  for (std::size_t start = 0; start < refs.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(refs.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<Sample> samples;
    for (std::size_t i = start; i < end; ++i) {
      samples.push_back(stack_sample(data, refs[i], mc.q, layout_of(mc), stats,
                                     mc.n_classes, mc.uses_ad()));
    }
    const Batch batch = collate(samples);
    const SegmentationOutput out =
        model.forward({batch.rd_in, batch.ra_in, batch.ad_in}, false);
    coherence_sum += static_cast<double>(coherence_loss(out.p_rd, out.p_ra).item()) *
                     static_cast<double>(batch.size);
    const auto rd_pred = decode_hard(out.p_rd);
    const auto ra_pred = decode_hard(out.p_ra);
    for (std::size_t i = start; i < end; ++i) {
      const auto& seq = data.sequences[refs[i].sequence];
      const FrameData& f = seq.frames[static_cast<std::size_t>(refs[i].t)];
      const std::size_t b = i - start;
      std::span<const std::uint8_t> rd(rd_pred.data() + b * rd_bins,
                                       static_cast<std::size_t>(rd_bins));
      std::span<const std::uint8_t> ra(ra_pred.data() + b * ra_bins,
                                       static_cast<std::size_t>(ra_bins));
      report.rd_counts.add(rd, f.rd_mask);
      report.ra_counts.add(ra, f.ra_mask);
      if (!export_dir.empty()) {
        const fs::path dir = fs::path(export_dir) / seq.name;
        fs::create_directories(dir);
        std::ostringstream stem;
        stem << "frame_" << std::setw(4) << std::setfill('0') << refs[i].t;
        write_mask_png((dir / (stem.str() + ".rd.png")).string(), rd, mc.n_range,
                       mc.n_doppler);
        write_mask_png((dir / (stem.str() + ".ra.png")).string(), ra, mc.n_range,
                       mc.n_angle);
      }
    }
    report.samples += batch.size;
  }
  report.rd = iou_dice(report.rd_counts);
  report.ra = iou_dice(report.ra_counts);
  report.coherence =
      report.samples > 0 ? coherence_sum / static_cast<double>(report.samples) : 0;
  return report;
}

// ---------------------------------------------------------------- checkpoint

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  KeyValues kv;
  kv["format"] = "radseg-checkpoint";
  for (const auto& [k, v] : c.train.to_key_values()) kv["train." + k] = v;
  kv["model.variant"] = variant_name(c.model.variant);
  kv["model.q"] = std::to_string(c.model.q);
  kv["model.width"] = format_double(c.model.width);
  kv["model.n_classes"] = std::to_string(c.model.n_classes);
  kv["model.n_range"] = std::to_string(c.model.n_range);
  kv["model.n_angle"] = std::to_string(c.model.n_angle);
  kv["model.n_doppler"] = std::to_string(c.model.n_doppler);
  std::string rates;
  for (Index r : c.model.aspp_rates) rates += (rates.empty() ? "" : ",") + std::to_string(r);
  kv["model.aspp_rates"] = rates;
  const std::pair<const char*, const ViewStats*> views[] = {
      {"rd", &c.stats.rd}, {"ra", &c.stats.ra}, {"ad", &c.stats.ad}};
  for (const auto& [name, s] : views) {
    kv[std::string("stats.") + name + ".min"] = format_double(s->min);
    kv[std::string("stats.") + name + ".max"] = format_double(s->max);
  }
  kv["class_weight_count"] = std::to_string(c.class_weights.size());
  for (std::size_t k = 0; k < c.class_weights.size(); ++k) {
    kv["class_weight." + std::to_string(k)] = format_double(c.class_weights[k]);
  }
  kv["epoch"] = std::to_string(c.epoch);
  kv["rng_state"] = c.rng_state;
  kv["best_score"] = format_double(c.best_score);
  kv["best_epoch"] = std::to_string(c.best_epoch);
  kv["adam.step"] = std::to_string(c.adam_step);

  std::string text;
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  std::string bytes(kCkptMagic, 4);
  put<std::uint32_t>(bytes, kCkptVersion);
  put<std::uint64_t>(bytes, text.size());
  bytes += text;
  put<std::uint32_t>(bytes, static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& t : c.tensors) {
    put<std::uint32_t>(bytes, static_cast<std::uint32_t>(t.name.size()));
    bytes += t.name;
    const std::string blob =
        encode_rseg(kDoublePrecision ? DType::kF64 : DType::kF32, t.tensor.shape(),
                    t.tensor.data());
    put<std::uint64_t>(bytes, blob.size());
    bytes += blob;
  }
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("checkpoint: cannot open " + tmp);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw DataError("checkpoint: write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(is)),
                          std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  if (take_bytes(bytes, pos, 4, path) != std::string(kCkptMagic, 4)) {
    throw DataError("checkpoint: bad magic in " + path);
  }
  const auto version = take<std::uint32_t>(bytes, pos, path);
  if (version != kCkptVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto text_len = take<std::uint64_t>(bytes, pos, path);
  const KeyValues kv = parse_key_values(take_bytes(bytes, pos, text_len, path), path);
  if (kv_get(kv, "format") != "radseg-checkpoint") {
    throw DataError("checkpoint: " + path + " is not a checkpoint");
  }

  Checkpoint c;
  KeyValues train_kv;
  for (const auto& [k, v] : kv) {
    if (k.starts_with("train.")) train_kv[k.substr(6)] = v;
  }
  c.train = TrainConfig::from_key_values(train_kv);
  c.model.variant = parse_variant(kv_get(kv, "model.variant"));
  c.model.q = static_cast<int>(kv_index(kv, "model.q"));
  c.model.width = kv_double(kv, "model.width");
  c.model.n_classes = static_cast<int>(kv_index(kv, "model.n_classes"));
  c.model.n_range = kv_index(kv, "model.n_range");
  c.model.n_angle = kv_index(kv, "model.n_angle");
  c.model.n_doppler = kv_index(kv, "model.n_doppler");
  c.model.aspp_rates.clear();
  {
    std::stringstream ss(kv_get(kv, "model.aspp_rates"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      KeyValues one{{"rate", item}};
      c.model.aspp_rates.push_back(kv_index(one, "rate"));
    }
  }
  std::pair<const char*, ViewStats*> views[] = {
      {"rd", &c.stats.rd}, {"ra", &c.stats.ra}, {"ad", &c.stats.ad}};
  for (auto& [name, s] : views) {
    s->min = kv_double(kv, std::string("stats.") + name + ".min");
    s->max = kv_double(kv, std::string("stats.") + name + ".max");
  }
  const Index nw = kv_index(kv, "class_weight_count");
  for (Index k = 0; k < nw; ++k) {
    c.class_weights.push_back(kv_double(kv, "class_weight." + std::to_string(k)));
  }
  c.epoch = kv_index(kv, "epoch");
  c.rng_state = kv_get(kv, "rng_state");
  c.best_score = kv_double(kv, "best_score");
  c.best_epoch = kv_index(kv, "best_epoch");
  c.adam_step = static_cast<std::int64_t>(kv_index(kv, "adam.step"));

  const auto count = take<std::uint32_t>(bytes, pos, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = take<std::uint32_t>(bytes, pos, path);
    std::string name = take_bytes(bytes, pos, name_len, path);
    const auto blob_len = take<std::uint64_t>(bytes, pos, path);
    const std::string blob = take_bytes(bytes, pos, blob_len, path);
    c.tensors.push_back({name, tensor_from_rseg(decode_rseg(blob, path + ":" + name))});
  }
  if (pos != bytes.size()) throw DataError("checkpoint: trailing bytes in " + path);
  return c;
}

Model restore_model(const Checkpoint& c) {
  Model model(c.model);
  for (const auto& p : model.parameters()) {
    Tensor dst = p.tensor;
    copy_into(dst, find_tensor(c, "param." + p.name), p.name);
  }
  for (const auto& b : model.buffers()) {
    Tensor dst = b.tensor;
    copy_into(dst, find_tensor(c, "buffer." + b.name), b.name);
  }
  return model;
}

// ---------------------------------------------------------------- trainer

Trainer::Trainer(TrainConfig config, const DatasetIndex& data, std::string out_dir,
                 std::ostream* log)
    : Trainer(config, data, std::move(out_dir), log,
              Model(model_config(config, data), derive_seed(config.seed, 1))) {
  rng_ = Rng(derive_seed(config_.seed, 2));
  if (!out_dir_.empty()) {
    std::ofstream os(fs::path(out_dir_) / "train_log.csv", std::ios::trunc);
    os << csv_header() << "\n";
  }
}

Trainer::Trainer(TrainConfig config, const DatasetIndex& data, std::string out_dir,
                 std::ostream* log, Model model)
    : config_(std::move(config)),
      data_(data),
      out_dir_(std::move(out_dir)),
      log_(log),
      model_(std::move(model)) {
  config_.validate();
  train_ = load_split(data_, "train");
  if (enumerate_samples(train_, model_.config().q).empty()) {
    throw DataError("train: the train split has no frame with " +
                    std::to_string(model_.config().q) + " past frames");
  }
  val_ = load_split(data_, "val");
  class_weights_ = compute_class_weights(data_);
  adam_.beta1 = config_.adam_beta1;
  adam_.beta2 = config_.adam_beta2;
  adam_.eps = config_.adam_eps;
  model_.set_requires_grad(true);
  if (!out_dir_.empty()) fs::create_directories(out_dir_);
}

Trainer::Trainer(Trainer&&) noexcept = default;
Trainer::~Trainer() = default;

Trainer Trainer::resume(const std::string& checkpoint, const DatasetIndex& data,
                        std::string out_dir, std::ostream* log) {
  const Checkpoint c = load_checkpoint(checkpoint);
  check_extents(c.model, data);
  Trainer t(c.train, data, std::move(out_dir), log, restore_model(c));
  t.rng_.set_state(c.rng_state);
  t.epoch_ = c.epoch;
  t.best_score_ = c.best_score;
  t.best_epoch_ = c.best_epoch;
  t.adam_.step = c.adam_step;
  const auto& params = t.model_.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& m = find_tensor(c, "adam.m." + std::to_string(i));
    const Tensor& v = find_tensor(c, "adam.v." + std::to_string(i));
    if (m.numel() != params[i].tensor.numel() || v.numel() != params[i].tensor.numel()) {
      throw ShapeError("checkpoint: adam moments do not match " + params[i].name);
    }
    t.adam_.m.emplace_back(m.values().begin(), m.values().end());
    t.adam_.v.emplace_back(v.values().begin(), v.values().end());
  }
  return t;
}

Checkpoint Trainer::snapshot() const {
  Checkpoint c;
  c.train = config_;
  c.model = model_.config();
  c.stats = data_.stats;
  c.class_weights = class_weights_;
  c.epoch = epoch_;
  c.rng_state = rng_.state();
  c.best_score = best_score_;
  c.best_epoch = best_epoch_;
  c.adam_step = adam_.step;
  for (const auto& p : model_.parameters()) {
    c.tensors.push_back({"param." + p.name, p.tensor.clone()});
  }
  for (const auto& b : model_.buffers()) {
    c.tensors.push_back({"buffer." + b.name, b.tensor.clone()});
  }
  for (std::size_t i = 0; i < adam_.m.size(); ++i) {
    const Shape s{static_cast<Index>(adam_.m[i].size())};
    c.tensors.push_back({"adam.m." + std::to_string(i), Tensor(s, adam_.m[i])});
    c.tensors.push_back({"adam.v." + std::to_string(i), Tensor(s, adam_.v[i])});
  }
  return c;
}

EpochLog Trainer::run_epoch() {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelConfig& mc = model_.config();
  EpochLog log;
  log.epoch = epoch_;
  log.lr = config_.lr_at(epoch_);

  auto refs = enumerate_samples(train_, mc.q);
  rng_.shuffle(refs.begin(), refs.end());
  const std::vector<Real> weights = to_real(class_weights_);
  const LossWeights lw{static_cast<Real>(config_.weight_wce),
                       static_cast<Real>(config_.weight_sdice),
                       static_cast<Real>(config_.weight_col)};
  const std::vector<Tensor> params = param_tensors(model_);
  const auto bs = static_cast<std::size_t>(config_.batch_size);
  Index batches = 0;
  for (std::size_t start = 0; start < refs.size(); start += bs) {
    const std::size_t end = std::min(refs.size(), start + bs);
    std::vector<Sample> samples;
    for (std::size_t i = start; i < end; ++i) {
      Sample s = stack_sample(train_, refs[i], mc.q, layout_of(mc), data_.stats,
                              mc.n_classes, mc.uses_ad());
      samples.push_back(config_.augment ? augment_flip(s, rng_) : s);
    }
    const Batch batch = collate(samples);
    const SegmentationOutput out =
        model_.forward({batch.rd_in, batch.ra_in, batch.ad_in}, true);
    const LossBreakdown br = combined_loss(out.p_rd, out.p_ra, batch.rd_target,
                                           batch.ra_target, weights, lw);
    const double total = static_cast<double>(br.total.item());
    if (!std::isfinite(total)) {
      throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch_) +
                           ", step " + std::to_string(step_) + " (wCE " +
                           format_double(br.wce_rd + br.wce_ra) + ", SDice " +
                           format_double(br.sdice_rd + br.sdice_ra) + ", CoL " +
                           format_double(br.col) + ")");
    }
    if (!first_step_taken_) {
      first_step_ = br;
      first_step_.total = Tensor(Shape{1}, {br.total.item()});
      first_step_taken_ = true;
    }
    model_.zero_grad();
    br.total.backward();
    adam_step(params, adam_, log.lr);
    log.loss += total;
    log.wce_rd += br.wce_rd;
    log.wce_ra += br.wce_ra;
    log.sdice_rd += br.sdice_rd;
    log.sdice_ra += br.sdice_ra;
    log.col += br.col;
    ++batches;
    ++step_;
  }
  const double nb = static_cast<double>(std::max<Index>(batches, 1));
  log.loss /= nb;
  log.wce_rd /= nb;
  log.wce_ra /= nb;
  log.sdice_rd /= nb;
  log.sdice_ra /= nb;
  log.col /= nb;
  ++epoch_;

  if (!enumerate_samples(val_, mc.q).empty()) {
    log.has_val = true;
    log.val = evaluate(model_, val_, data_.stats, config_.batch_size);
  }
  if (config_.target_train_miou > 0 && epoch_ % config_.train_eval_every == 0) {
    log.has_train_eval = true;
    log.train_eval = evaluate(model_, train_, data_.stats, config_.batch_size);
    target_reached_ = log.train_eval.rd.miou >= config_.target_train_miou &&
                      log.train_eval.ra.miou >= config_.target_train_miou;
  }
  log.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

void Trainer::write_csv_row(const EpochLog& e) {
  if (out_dir_.empty()) return;
  std::ofstream os(fs::path(out_dir_) / "train_log.csv", std::ios::app);
  os << e.epoch << ',' << e.lr << ',' << e.loss << ',' << e.wce_rd << ','
     << e.wce_ra << ',' << e.sdice_rd << ',' << e.sdice_ra << ',' << e.col << ',';
  if (e.has_val) {
    os << e.val.rd.miou << ',' << e.val.ra.miou << ',' << e.val.rd.mdice << ','
       << e.val.ra.mdice << ',' << e.val.coherence << ',';
  } else {
    os << ",,,,,";
  }
  if (e.has_train_eval) {
    os << e.train_eval.rd.miou << ',' << e.train_eval.ra.miou << ',';
  } else {
    os << ",,";
  }
  os << e.seconds << "\n";
}

std::vector<EpochLog> Trainer::run(Index stop_after) {
  std::vector<EpochLog> history;
  const Index last = stop_after >= 0 ? std::min(stop_after, config_.epochs)
                                     : config_.epochs;
  while (epoch_ < last && !target_reached_) {
    EpochLog e = run_epoch();
    bool improved = false;
    if (e.has_val && e.val.score() > best_score_) {
      best_score_ = e.val.score();
      best_epoch_ = e.epoch;
      improved = true;
    }
    write_csv_row(e);
    if (log_) {
      std::ostringstream line;
      line << std::fixed << std::setprecision(4) << "epoch " << e.epoch << " lr "
           << std::scientific << std::setprecision(3) << e.lr << std::fixed
           << std::setprecision(4) << " loss " << e.loss << " col " << e.col;
      if (e.has_val) {
        line << std::setprecision(2) << " val mIoU RD " << e.val.rd.miou << " RA "
             << e.val.ra.miou << " coherence " << std::setprecision(5)
             << e.val.coherence;
      }
      if (e.has_train_eval) {
        line << std::setprecision(2) << " train mIoU RD " << e.train_eval.rd.miou
             << " RA " << e.train_eval.ra.miou;
      }
      line << std::setprecision(1) << " (" << e.seconds << " s)";
      *log_ << line.str() << std::endl;
    }
    if (!out_dir_.empty()) {
      const bool final = epoch_ >= last || target_reached_;
      if (improved || epoch_ % config_.checkpoint_every == 0 || final) {
        const Checkpoint c = snapshot();
        if (improved) save_checkpoint((fs::path(out_dir_) / "best.ckpt").string(), c);
        if (epoch_ % config_.checkpoint_every == 0 || final) {
          save_checkpoint((fs::path(out_dir_) / "last.ckpt").string(), c);
        }
      }
    }
    history.push_back(std::move(e));
  }
  return history;
}

RADSEG_NAMESPACE_END
