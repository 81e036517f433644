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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "radseg/gradcheck.hpp"

RADSEG_NAMESPACE_BEGIN

struct GradSuiteEntry {
  std::string name;
  double max_rel_error = 0;
  double tolerance = 1e-4;
  Index checked = 0;  // coordinates compared over all seeds
  // Worst coordinate.
  int worst_seed = -1;
  double worst_analytic = 0;
  double worst_numeric = 0;

  bool passed() const { return max_rel_error < tolerance; }
};

struct GradSuiteOptions {
  int seeds = 100;
  double eps = 1e-5;
  // Adds the end-to-end TMVA-Net (width 1/8) + combined loss check.
  bool full = false;
  std::uint64_t base_seed = 0;
};

// Finite-difference checks of every engine op and loss, each reduced with a
// random projection to a scalar. 64-bit build only.
std::vector<GradSuiteEntry> run_grad_suite(
    const GradSuiteOptions& options,
    const std::function<void(const GradSuiteEntry&)>& progress = {});

// TMVA-Net at width 1/8 on 16x16x4 views, batch 2, combined loss; checks
// sampled coordinates of every parameter tensor and of the inputs.
GradSuiteEntry model_gradcheck(std::uint64_t seed, double eps = 1e-5,
                               Index coords_per_tensor = 2);

RADSEG_NAMESPACE_END
