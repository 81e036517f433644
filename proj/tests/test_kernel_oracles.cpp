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

// Conv, transposed conv, max-pool and GEMM kernels against plain nested loops,
// bit for bit.

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace radseg;
using namespace radseg_test;

TEST(KernelOracle, Conv2dMatchesNestedLoopsBitForBit) {
  const OracleReport r = check_conv2d(200, 11);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(KernelOracle, Conv3dMatchesNestedLoopsBitForBit) {
  const OracleReport r = check_conv3d(100, 12);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(KernelOracle, TransposedConvMatchesNestedLoopsBitForBit) {
  const OracleReport r = check_conv_transpose2d(200, 13);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(KernelOracle, MaxPoolMatchesNestedLoops) {
  const OracleReport r = check_maxpool2d(200, 14);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(KernelOracle, GemmAccumulatesInReductionOrder) {
  const OracleReport r = check_gemm(50, 15);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(KernelOracle, GemmNtMatchesReferenceClosely) {
  Rng rng(16);
  const Index m = 5, n = 7, k = 600;
  std::vector<Real> a(m * k), b(n * k), c(m * n, Real(0));
  for (auto& v : a) v = static_cast<Real>(rng.normal());
  for (auto& v : b) v = static_cast<Real>(rng.normal());
  kernels::gemm_nt_acc(m, n, k, a.data(), k, b.data(), k, c.data(), n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) {
      double ref = 0;
      for (Index p = 0; p < k; ++p) ref += double(a[i * k + p]) * double(b[j * k + p]);
      EXPECT_NEAR(c[i * n + j], ref, kDoublePrecision ? 1e-10 : 1e-3);
    }
}

TEST(KernelOracle, TransposeIsExact) {
  Rng rng(17);
  const Index rows = 37, cols = 70;
  std::vector<Real> a(rows * cols), t(rows * cols);
  for (auto& v : a) v = static_cast<Real>(rng.normal());
  kernels::transpose(rows, cols, a.data(), t.data());
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) ASSERT_EQ(t[j * rows + i], a[i * cols + j]);
}
