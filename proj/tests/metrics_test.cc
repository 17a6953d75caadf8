/*
 * Copyright 2026 The SISA++ Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "sisa/errors.h"
#include "sisa/metrics.h"
#include "sisa/rng.h"

namespace sisa {
namespace {

using IntVec = std::vector<int>;
using RealVec = std::vector<double>;

TEST(AccuracyTest, Examples) {
  EXPECT_EQ(Accuracy(IntVec{1, 2, 3}, IntVec{1, 2, 3}), 1.0);
  EXPECT_EQ(Accuracy(IntVec{0, 0}, IntVec{1, 1}), 0.0);
  EXPECT_EQ(Accuracy(IntVec{0, 1, 1, 2}, IntVec{0, 1, 2, 2}), 0.75);
  EXPECT_THROW(Accuracy(IntVec{0}, IntVec{0, 1}), InvalidArgumentError);
  EXPECT_THROW(Accuracy(IntVec{}, IntVec{}), InvalidArgumentError);
}

TEST(MacroF1Test, Examples) {
  EXPECT_EQ(MacroF1(IntVec{0, 1, 2}, IntVec{0, 1, 2}, 3), 1.0);
  EXPECT_EQ(MacroF1(IntVec{0, 0, 1, 1}, IntVec{0, 1, 0, 1}, 2), 0.5);
  // Class 2 absent from truth and predictions: mean over classes 0 and 1.
  EXPECT_EQ(MacroF1(IntVec{0, 1}, IntVec{0, 1}, 3), 1.0);
  // Class 1 predicted but absent from truth: excluded; class 0 has F1 2/3.
  EXPECT_DOUBLE_EQ(MacroF1(IntVec{0, 1}, IntVec{0, 0}, 2), 2.0 / 3.0);
  EXPECT_THROW(MacroF1(IntVec{0}, IntVec{0}, 1), InvalidArgumentError);
  EXPECT_THROW(MacroF1(IntVec{0, 2}, IntVec{0, 1}, 2), InvalidArgumentError);
  EXPECT_THROW(MacroF1(IntVec{0}, IntVec{0, 1}, 2), InvalidArgumentError);
}

TEST(RegressionMetricsTest, Examples) {
  EXPECT_EQ(MeanAbsoluteError(RealVec{1.5, -2}, RealVec{1.5, -2}), 0.0);
  EXPECT_EQ(RootMeanSquaredError(RealVec{1.5, -2}, RealVec{1.5, -2}), 0.0);
  EXPECT_EQ(MeanAbsoluteError(RealVec{0, 0}, RealVec{3, -3}), 3.0);
  EXPECT_EQ(RootMeanSquaredError(RealVec{0, 0}, RealVec{3, -3}), 3.0);
  EXPECT_EQ(MeanAbsoluteError(RealVec{0, 0}, RealVec{1, 3}), 2.0);
  EXPECT_NEAR(RootMeanSquaredError(RealVec{0, 0}, RealVec{1, 3}), 2.23606797749979, 1e-14);
  EXPECT_THROW(MeanAbsoluteError(RealVec{0}, RealVec{}), InvalidArgumentError);
  EXPECT_THROW(RootMeanSquaredError(RealVec{}, RealVec{}), InvalidArgumentError);
}

TEST(MetricOracleTest, ThousandRandomCases) {
  RngStream rng({2026, kNoIndex, kNoIndex, "metric-cases"});
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.NextBelow(40));
    const int c = 2 + static_cast<int>(rng.NextBelow(5));
    IntVec p(n), t(n);
    RealVec pr(n), tr(n);
    for (int i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.NextBelow(c));
      t[i] = static_cast<int>(rng.NextBelow(c));
      pr[i] = rng.NextUniform(-10.0, 10.0);
      tr[i] = rng.NextUniform(-10.0, 10.0);
    }
    // Accuracy is a ratio of integer counts: exact.
    ASSERT_EQ(Accuracy(p, t), oracle::Accuracy(p, t)) << trial;
    ASSERT_NEAR(MacroF1(p, t, c), oracle::MacroF1(p, t, c), 1e-12) << trial;
    const double mae = MeanAbsoluteError(pr, tr);
    const double rmse = RootMeanSquaredError(pr, tr);
    ASSERT_NEAR(mae, oracle::Mae(pr, tr), 1e-12) << trial;
    ASSERT_NEAR(rmse, oracle::Rmse(pr, tr), 1e-12) << trial;
    ASSERT_GE(rmse, mae * (1.0 - 1e-15)) << trial;
    const double acc = Accuracy(p, t), f1 = MacroF1(p, t, c);
    ASSERT_TRUE(acc >= 0.0 && acc <= 1.0 && f1 >= 0.0 && f1 <= 1.0);
  }
}

}  // namespace
}  // namespace sisa
