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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include "gradcheck_command.hpp"
#include "radseg/dataset.hpp"
#include "radseg/models.hpp"
#include "radseg/train.hpp"

namespace {

namespace fs = std::filesystem;
using namespace radseg;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

int cmd_simulate(const std::string& out, const SimulateOptions& opt) {
  std::vector<std::string> events;
  const DatasetIndex index = simulate_dataset(out, opt, &events);
  for (const auto& e : events) std::cerr << "coverage: " << e << "\n";
  std::cout << "wrote " << index.sequences.size() << " sequences ("
            << index.split("train").size() << " train, " << index.split("val").size()
            << " val, " << index.split("test").size() << " test) at " << index.n_range
            << "x" << index.n_angle << "x" << index.n_doppler << " to " << out << "\n";
  return kOk;
}

int cmd_train(const std::string& data_dir, const std::string& variant,
              const std::string& config_path, const std::string& out,
              const std::string& resume, long long epochs) {
  const DatasetIndex index = DatasetIndex::load(data_dir);
  if (!resume.empty()) {
    Trainer t = Trainer::resume(resume, index, out, &std::cerr);
    if (!variant.empty() && parse_variant(variant) != t.config().variant) {
      throw ConfigError("train: --variant " + variant + " differs from the checkpoint (" +
                        variant_name(t.config().variant) + ")");
    }
    t.run(epochs >= 0 ? epochs : -1);
    std::cout << "finished at epoch " << t.epoch() << ", checkpoints in " << out << "\n";
    return kOk;
  }
  TrainConfig cfg = config_path.empty() ? TrainConfig{} : TrainConfig::load(config_path);
  if (!variant.empty()) cfg.variant = parse_variant(variant);
  if (epochs >= 0) cfg.epochs = epochs;
  cfg.validate();
  Trainer t(cfg, index, out, &std::cerr);
  write_key_values((fs::path(out) / "config.txt").string(), cfg.to_key_values());
  t.run();
  std::cout << "finished at epoch " << t.epoch()
            << (t.target_reached() ? " (train mIoU target reached)" : "")
            << ", checkpoints in " << out << "\n";
  return kOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_dir,
             const std::string& split, const std::string& export_dir,
             const std::string& csv_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const DatasetIndex index = DatasetIndex::load(data_dir);
  if (ckpt.model.n_range != index.n_range || ckpt.model.n_angle != index.n_angle ||
      ckpt.model.n_doppler != index.n_doppler) {
    throw ConfigError("eval: checkpoint extents " + std::to_string(ckpt.model.n_range) +
                      "x" + std::to_string(ckpt.model.n_angle) + "x" +
                      std::to_string(ckpt.model.n_doppler) +
                      " do not match dataset extents " + std::to_string(index.n_range) +
                      "x" + std::to_string(index.n_angle) + "x" +
                      std::to_string(index.n_doppler));
  }
  Model model = restore_model(ckpt);
  const SplitData data = load_split(index, split);
  const EvalReport r = evaluate(model, data, ckpt.stats, ckpt.train.batch_size, export_dir);
  std::cout << variant_name(ckpt.model.variant) << " on " << split << " (" << r.samples
            << " frames)\n";
  std::cout << "view   bkg    ped    cyc    car    mIoU  |   bkg    ped    cyc    car   mDice\n";
  std::cout << format_scores_row("RD", r.rd) << "\n" << format_scores_row("RA", r.ra) << "\n";
  std::cout << "coherence " << std::setprecision(6) << r.coherence << "\n";
  if (!csv_path.empty()) {
    std::ofstream os(csv_path);
    if (!os) throw DataError("eval: cannot write " + csv_path);
    write_scores_csv(os, "rd", r.rd, true);
    write_scores_csv(os, "ra", r.ra, false);
  }
  return kOk;
}

int cmd_params(const std::string& variant, double width, int n_classes) {
  ModelConfig mc;
  mc.variant = parse_variant(variant);
  mc.width = width;
  mc.n_classes = n_classes;
  Model model(mc);
  std::cout << variant_name(mc.variant) << " (width " << width << ", " << n_classes
            << " classes)\n";
  for (const auto& [layer, count] : model.parameter_table()) {
    std::cout << std::left << std::setw(16) << layer << std::right << std::setw(10)
              << count << "\n";
  }
  const Index total = model.parameter_count();
  std::cout << std::left << std::setw(16) << "total" << std::right << std::setw(10)
            << total << "  (" << std::fixed << std::setprecision(2)
            << static_cast<double>(total) / 1e6 << "M)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view radar semantic segmentation"};
  app.require_subcommand(1);

  std::string out, data_dir, variant, config_path, resume, ckpt, split = "test",
                                                              export_dir, csv_path;
  long long epochs = -1;
  SimulateOptions sim;
  bool full = false;
  int seeds = 100;
  double width = 1.0;
  int n_classes = 4;

  auto* simulate = app.add_subcommand("simulate", "Simulate a synthetic dataset");
  simulate->add_option("--out", out, "Output directory")->required();
  simulate->add_option("--frames", sim.frames, "Total frames")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--profile", sim.profile, "Extents profile")
      ->check(CLI::IsMember({"desk", "full", "small"}));
  simulate->add_option("--frames-per-sequence", sim.frames_per_sequence)
      ->check(CLI::PositiveNumber);
  simulate->add_option("--val-fraction", sim.val_fraction)->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--test-fraction", sim.test_fraction)->check(CLI::Range(0.0, 1.0));

  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--variant", variant, "mv_net, mva_net_a, mva_net_b or tmva_net");
  train->add_option("--config", config_path, "key=value training config");
  train->add_option("--out", out, "Output directory")->required();
  train->add_option("--resume", resume, "Checkpoint to resume from");
  train->add_option("--epochs", epochs, "Override the epoch count");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  eval->add_option("--data", data_dir, "Dataset directory")->required();
  eval->add_option("--split", split, "train, val or test");
  eval->add_option("--export-masks", export_dir, "Write predicted masks as PNG");
  eval->add_option("--csv", csv_path, "Write per-class scores as CSV");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  grad->add_flag("--full", full, "Include the end-to-end model check");
  grad->add_option("--seeds", seeds, "Random seeds per check")->check(CLI::PositiveNumber);

  auto* params = app.add_subcommand("params", "Per-layer parameter counts");
  params->add_option("--variant", variant)->required();
  params->add_option("--width", width)->check(CLI::PositiveNumber);
  params->add_option("--classes", n_classes)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(out, sim);
    if (*train) return cmd_train(data_dir, variant, config_path, out, resume, epochs);
    if (*eval) return cmd_eval(ckpt, data_dir, split, export_dir, csv_path);
    if (*grad) return radseg_tool::run_gradcheck(full, seeds, std::cout);
    if (*params) return cmd_params(variant, width, n_classes);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
