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

#include "gradcheck_command.hpp"

#include <iomanip>
#include <ostream>

#include "radseg/grad_suite.hpp"

namespace radseg_tool {

int run_gradcheck(bool full, int seeds, std::ostream& out) {
  radseg::GradSuiteOptions opt;
  opt.full = full;
  opt.seeds = seeds;
  bool ok = true;
  radseg::run_grad_suite(opt, [&](const radseg::GradSuiteEntry& e) {
    ok = ok && e.passed();
    out << std::left << std::setw(22) << e.name << std::right << " max rel err "
        << std::scientific << std::setprecision(3) << e.max_rel_error << " (tol "
        << e.tolerance << ", " << e.checked << " coords)  "
        << (e.passed() ? "ok" : "FAIL") << std::endl;
  });
  return ok ? 0 : 3;
}

}  // namespace radseg_tool
