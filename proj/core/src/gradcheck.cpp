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

#include "radseg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

RADSEG_NAMESPACE_BEGIN

namespace {

Tensor checked_scalar(const ScalarFn& f) {
  Tensor y = f();
  if (!y.defined() || y.numel() != 1) {
    throw ShapeError("grad_check: function must return a scalar, got " +
                     (y.defined() ? to_string(y.shape()) : std::string("none")));
  }
  return y;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, Tensor x, double eps,
                           const std::vector<Index>& coords) {
  if (!kDoublePrecision) {
    throw ConfigError("grad_check requires the 64-bit build mode");
  }
  const bool had_grad = x.requires_grad();
  x.set_requires_grad(true);
  x.zero_grad();
  {
    Tensor y = checked_scalar(f);
    if (!y.requires_grad()) {
      throw ConfigError("grad_check: output does not depend on the input");
    }
    y.backward();
  }
  std::vector<Real> analytic(x.grad().begin(), x.grad().end());

  std::vector<Index> idx = coords;
  if (idx.empty()) {
    idx.resize(static_cast<std::size_t>(x.numel()));
    std::iota(idx.begin(), idx.end(), Index(0));
  }

  GradCheckResult result;
  for (Index i : idx) {
    Real& v = x.values()[static_cast<std::size_t>(i)];
    const Real saved = v;
    double fp, fm;
    {
      NoGradGuard guard;
      v = saved + static_cast<Real>(eps);
      fp = checked_scalar(f).item();
      v = saved - static_cast<Real>(eps);
      fm = checked_scalar(f).item();
    }
    v = saved;
    const double numeric = (fp - fm) / (2 * eps);
    const double a = analytic[static_cast<std::size_t>(i)];
    const double err =
        std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    ++result.checked;
    if (err > result.max_rel_error || result.worst_index < 0) {
      result.max_rel_error = std::max(result.max_rel_error, err);
      if (err >= result.max_rel_error) {
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  x.set_requires_grad(had_grad);
  return result;
}

GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f,
                           const Tensor& x, double eps) {
  return grad_check([&] { return f(x); }, x, eps);
}

RADSEG_NAMESPACE_END
