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

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "acceptance.hpp"
#include "radseg/train.hpp"

namespace radseg_acceptance {

namespace {

namespace fs = std::filesystem;
using namespace radseg;
using clock_type = std::chrono::steady_clock;

double since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

struct RunResult {
  double best_val = -1;
  double final_coherence = 0;
  double last_train_rd = 0;
  double last_train_ra = 0;
  Index epochs = 0;
  bool target_reached = false;
};

RunResult train(const TrainConfig& cfg, const DatasetIndex& data, const std::string& tag,
                std::ostream& log) {
  const auto t0 = clock_type::now();
  log << "== " << tag << "\n";
  Trainer t(cfg, data, "", &log);
  const std::vector<EpochLog> history = t.run();
  RunResult r;
  r.epochs = t.epoch();
  r.target_reached = t.target_reached();
  for (const auto& e : history) {
    if (e.has_val) {
      r.best_val = std::max(r.best_val, e.val.score());
      r.final_coherence = e.val.coherence;
    }
    if (e.has_train_eval) {
      r.last_train_rd = e.train_eval.rd.miou;
      r.last_train_ra = e.train_eval.ra.miou;
    }
  }
  log << "== " << tag << " done after " << r.epochs << " epochs in " << fixed(since(t0), 0)
      << " s\n";
  return r;
}

Verdict overfit(const TrainingOptions& o, std::ostream& log, std::string& detail) {
  SimulateOptions sim;
  sim.frames = o.overfit_frames;
  sim.frames_per_sequence = o.overfit_frames_per_sequence;
  sim.val_fraction = 0;
  sim.test_fraction = 0;
  sim.seed = o.seed;
  sim.profile = "desk";
  const DatasetIndex data = simulate_dataset((fs::path(o.work_dir) / "overfit").string(), sim);

  TrainConfig cfg;
  cfg.variant = Variant::kTmvaNet;
  cfg.width = o.overfit_width;
  cfg.batch_size = o.overfit_batch;
  cfg.epochs = o.overfit_max_epochs;
  cfg.lr = o.overfit_lr;
  cfg.lr_decay_gamma = o.overfit_lr_decay;
  cfg.augment = false;
  cfg.target_train_miou = o.overfit_target;
  cfg.train_eval_every = 5;
  cfg.seed = o.seed;
  const RunResult r = train(cfg, data, "overfit tmva_net", log);
  detail = "overfit " + std::string(r.target_reached ? "reached" : "missed") + " " +
           fixed(o.overfit_target, 0) + "% train mIoU (RD " + fixed(r.last_train_rd) +
           ", RA " + fixed(r.last_train_ra) + ") after " + std::to_string(r.epochs) +
           " epochs";
  return {6, r.target_reached, detail};
}

}  // namespace

std::vector<Verdict> run_training_criteria(const TrainingOptions& o, std::ostream& log) {
  const auto t0 = clock_type::now();
  const std::clock_t cpu0 = std::clock();
  std::string overfit_detail;
  const Verdict fit = overfit(o, log, overfit_detail);

  SimulateOptions sim;
  sim.frames = o.split_frames;
  sim.frames_per_sequence = o.split_frames_per_sequence;
  sim.val_fraction = o.split_val_fraction;
  sim.test_fraction = 0;
  sim.seed = o.seed + 1;
  sim.profile = o.split_profile;
  const DatasetIndex data = simulate_dataset((fs::path(o.work_dir) / "split").string(), sim);

  auto base = [&](Variant v, int s) {
    TrainConfig cfg;
    cfg.variant = v;
    cfg.width = o.split_width;
    cfg.batch_size = o.split_batch;
    cfg.lr = o.split_lr;
    cfg.seed = o.seed + 100 + static_cast<std::uint64_t>(s);
    return cfg;
  };

  // Ablation: best validation score per run; each relation is decided by the
  // majority of seeds.
  const std::vector<Variant> order{Variant::kMvNet, Variant::kMvaNetA, Variant::kMvaNetB};
  std::vector<std::vector<double>> best(order.size());
  for (int s = 0; s < o.seeds; ++s) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      TrainConfig cfg = base(order[i], s);
      cfg.epochs = o.ablation_epochs;
      best[i].push_back(
          train(cfg, data, variant_name(order[i]) + " seed " + std::to_string(s), log).best_val);
    }
  }
  int a_over_mv = 0, b_over_a = 0;
  std::string scores;
  for (int s = 0; s < o.seeds; ++s) {
    a_over_mv += best[1][s] >= best[0][s];
    b_over_a += best[2][s] >= best[1][s];
    scores += (s ? "; " : "") + fixed(best[0][s]) + "/" + fixed(best[1][s]) + "/" +
              fixed(best[2][s]);
  }
  const int majority = o.seeds / 2 + 1;
  const bool ordering = a_over_mv >= majority && b_over_a >= majority;

  Verdict v6;
  v6.criterion = 6;
  v6.pass = fit.pass && ordering;
  v6.summary = overfit_detail + "; val mIoU mv/a/b per seed " + scores + " (a>=mv in " +
               std::to_string(a_over_mv) + "/" + std::to_string(o.seeds) + ", b>=a in " +
               std::to_string(b_over_a) + "/" + std::to_string(o.seeds) + ")";

  // Coherence: evaluation-time coherence of the final model, lambda 5 vs 0.
  int lower = 0;
  std::string pairs;
  for (int s = 0; s < o.seeds; ++s) {
    TrainConfig with = base(Variant::kTmvaNet, s);
    with.epochs = o.coherence_epochs;
    with.weight_col = 5;
    TrainConfig without = with;
    without.weight_col = 0;
    const double c5 = train(with, data, "tmva_net col 5 seed " + std::to_string(s), log)
                          .final_coherence;
    const double c0 = train(without, data, "tmva_net col 0 seed " + std::to_string(s), log)
                          .final_coherence;
    lower += c5 < c0;
    pairs += (s ? "; " : "") + fixed(c5, 5) + " vs " + fixed(c0, 5);
  }
  Verdict v7;
  v7.criterion = 7;
  v7.pass = lower >= majority;
  v7.summary = "val coherence with/without CoL per seed " + pairs + " (lower in " +
               std::to_string(lower) + "/" + std::to_string(o.seeds) + ")";
  // One CPU budget covers both criteria.
  const double cpu_min = double(std::clock() - cpu0) / CLOCKS_PER_SEC / 60;
  const bool in_budget = cpu_min <= o.cpu_budget_minutes;
  const std::string budget = "; CPU " + fixed(cpu_min, 1) + " of " +
                             fixed(o.cpu_budget_minutes, 0) + " min for criteria 6-7";
  v6.pass = v6.pass && in_budget;
  v7.pass = v7.pass && in_budget;
  v6.summary += budget;
  v7.summary += budget;
  log << "training criteria took " << fixed(since(t0) / 60, 1) << " min wall\n";
  return {v6, v7};
}

}  // namespace radseg_acceptance
