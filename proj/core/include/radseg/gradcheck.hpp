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

#include <functional>
#include <vector>

#include "radseg/tensor.hpp"

RADSEG_NAMESPACE_BEGIN

struct GradCheckResult {
  double max_rel_error = 0;
  Index worst_index = -1;
  double analytic = 0;
  double numeric = 0;
  Index checked = 0;
};

using ScalarFn = std::function<Tensor()>;

// Central-difference check of d f / d x for every coordinate of `x` listed in
// `coords` (all coordinates when empty). `f` must rebuild its graph from the
// current contents of `x` on each call and return a single-element tensor.
// Relative error is |a - n| / max(1e-8, |a| + |n|).
GradCheckResult grad_check(const ScalarFn& f, Tensor x, double eps = 1e-5,
                           const std::vector<Index>& coords = {});

// Convenience overload for f(x).
GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f,
                           const Tensor& x, double eps = 1e-5);

RADSEG_NAMESPACE_END
