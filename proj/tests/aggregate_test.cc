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
#include <filesystem>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "sisa/aggregate.h"
#include "sisa/errors.h"
#include "sisa/run.h"
#include "sisa/unlearn.h"
#include "test_util.h"

namespace sisa {
namespace {

using ::sisa::testing::BitwiseEqual;
using ::sisa::testing::BlobDataset;
using ::sisa::testing::LinearDataset;
using ::sisa::testing::SmallConfig;
using ::sisa::testing::TempDir;

ModelParams RandomModel(const ArchDescriptor& arch, uint64_t seed) {
  ModelParams m = ModelParams::Zeros(arch);
  RngStream rng({seed, kNoIndex, kNoIndex, "random-model"});
  for (double& p : m.params) p = rng.NextUniform(-2.0, 2.0);
  return m;
}

ArchDescriptor Arch67() { return ArchDescriptor::For(4, {8}, Task::Classification(3)); }

TEST(WeightAverageTest, TwoMembersArithmeticMean) {
  const ArchDescriptor arch = ArchDescriptor::For(1, {}, Task::Regression());
  ModelParams a = ModelParams::Zeros(arch), b = ModelParams::Zeros(arch);
  a.params = {1, 2};
  b.params = {3, 4};
  const std::vector<ModelParams> members = {a, b};
  const ModelParams m = WeightAverage(members);
  EXPECT_EQ(m.params, (std::vector<double>{2, 3}));
  EXPECT_EQ(m.arch, arch);
}

TEST(WeightAverageTest, SingleMemberIsBitwiseCopy) {
  ModelParams m = RandomModel(Arch67(), 1);
  m.params[0] = -0.0;
  m.params[1] = 5e-324;
  const std::vector<ModelParams> members = {m};
  EXPECT_TRUE(BitwiseEqual(WeightAverage(members), m));
}

TEST(WeightAverageTest, EightModelsMatchCompensatedOracle) {
  std::vector<ModelParams> members;
  for (uint64_t i = 0; i < 8; ++i) members.push_back(RandomModel(Arch67(), 100 + i));
  ASSERT_EQ(members[0].params.size(), 67u);
  const ModelParams m = WeightAverage(members);
  const std::vector<double> oracle = oracle::CompensatedMean(members);
  for (size_t j = 0; j < 67; ++j) EXPECT_LT(std::fabs(m.params[j] - oracle[j]), 1e-12);
}

TEST(WeightAverageTest, UpToSixtyFourMembersMatchOracle) {
  for (size_t n = 1; n <= 64; ++n) {
    std::vector<ModelParams> members;
    for (uint64_t i = 0; i < n; ++i) members.push_back(RandomModel(Arch67(), n * 1000 + i));
    // Widely varying magnitudes stress the summation.
    for (size_t i = 0; i < n; i += 3) {
      for (double& p : members[i].params) p *= 1e6;
    }
    const ModelParams m = WeightAverage(members);
    const std::vector<double> oracle = oracle::CompensatedMean(members);
    for (size_t j = 0; j < oracle.size(); ++j) {
      EXPECT_LE(std::fabs(m.params[j] - oracle[j]), 1e-12 * std::max(1.0, std::fabs(oracle[j])))
          << "n=" << n << " j=" << j;
    }
  }
}

TEST(WeightAverageTest, DeterministicInMemberOrder) {
  std::vector<ModelParams> members;
  for (uint64_t i = 0; i < 5; ++i) members.push_back(RandomModel(Arch67(), i));
  EXPECT_TRUE(BitwiseEqual(WeightAverage(members), WeightAverage(members)));
}

TEST(WeightAverageTest, IdenticalMembers) {
  const ModelParams m = RandomModel(Arch67(), 7);
  for (size_t n : {1, 2, 4, 8, 16}) {
    const std::vector<ModelParams> members(n, m);
    EXPECT_TRUE(BitwiseEqual(WeightAverage(members), m)) << n;
  }
  for (size_t n : {3, 5, 6, 7, 12}) {
    const std::vector<ModelParams> members(n, m);
    const ModelParams avg = WeightAverage(members);
    for (size_t j = 0; j < m.params.size(); ++j) {
      EXPECT_NEAR(avg.params[j], m.params[j], 1e-15 * std::fabs(m.params[j]) + 1e-300) << n;
    }
  }
}

TEST(WeightAverageTest, Idempotent) {
  std::vector<ModelParams> ms;
  for (uint64_t i = 0; i < 6; ++i) ms.push_back(RandomModel(Arch67(), 40 + i));
  const ModelParams once = WeightAverage(ms);
  for (size_t n : {1, 2, 4, 8}) {
    EXPECT_TRUE(BitwiseEqual(WeightAverage(std::vector<ModelParams>(n, once)), once));
  }
  const ModelParams thrice = WeightAverage(std::vector<ModelParams>(3, once));
  for (size_t j = 0; j < once.params.size(); ++j) {
    EXPECT_NEAR(thrice.params[j], once.params[j], 1e-15 * std::fabs(once.params[j]) + 1e-300);
  }
}

TEST(WeightAverageTest, RejectsIncompatibleMembers) {
  std::vector<ModelParams> members = {RandomModel(Arch67(), 1), RandomModel(Arch67(), 2),
                                      RandomModel(ArchDescriptor::For(4, {7}, Task::Classification(3)), 3)};
  try {
    WeightAverage(members);
    FAIL() << "expected rejection";
  } catch (const InvalidArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("members 0 and 2"), std::string::npos) << e.what();
  }
  members[2] = RandomModel(ArchDescriptor::For(4, {8}, Task::Classification(3), Activation::kTanh), 3);
  EXPECT_THROW(WeightAverage(members), InvalidArgumentError);
  EXPECT_THROW(WeightAverage(std::vector<ModelParams>{}), InvalidArgumentError);
}

TEST(MajorityVoteTest, Examples) {
  EXPECT_EQ(MajorityVote(std::vector<int>{0, 0, 1}, 2), 0);
  EXPECT_EQ(MajorityVote(std::vector<int>{1, 0}, 2), 0);
  EXPECT_EQ(MajorityVote(std::vector<int>{2, 1, 2, 1, 3}, 4), 1);
  EXPECT_THROW(MajorityVote(std::vector<int>{}, 2), InvalidArgumentError);
  EXPECT_THROW(MajorityVote(std::vector<int>{2}, 2), InvalidArgumentError);
}

// Every sequence of N votes over C classes, N <= 5, C <= 4.
TEST(MajorityVoteTest, ExhaustiveAgainstTally) {
  int checked = 0;
  for (int c = 1; c <= 4; ++c) {
    for (int n = 1; n <= 5; ++n) {
      int total = 1;
      for (int i = 0; i < n; ++i) total *= c;
      std::vector<int> votes(n);
      for (int code = 0; code < total; ++code) {
        int x = code;
        for (int i = 0; i < n; ++i) {
          votes[i] = x % c;
          x /= c;
        }
        ASSERT_EQ(MajorityVote(votes, c), oracle::TallyVote(votes));
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 5 + 62 + 363 + 1364);
}

// Classifier whose argmax is always `label`.
ModelParams ConstantClassifier(int label, int classes) {
  ModelParams m = ModelParams::Zeros(ArchDescriptor::For(1, {}, Task::Classification(classes)));
  m.params[classes + label] = 1.0;  // bias of `label`
  return m;
}

ModelParams ConstantRegressor(double value) {
  ModelParams m = ModelParams::Zeros(ArchDescriptor::For(1, {}, Task::Regression()));
  m.params[1] = value;
  return m;
}

TEST(EnsembleTest, VoteAndMeanExamples) {
  const std::vector<double> x = {0.5};
  EXPECT_EQ(EnsembleModel({ConstantClassifier(0, 3), ConstantClassifier(0, 3), ConstantClassifier(1, 3)},
                          EnsembleMode::kMajorityVote)
                .Predict(x),
            0.0);
  EXPECT_EQ(EnsembleModel({ConstantClassifier(1, 3), ConstantClassifier(0, 3)},
                          EnsembleMode::kMajorityVote)
                .Predict(x),
            0.0);
  const EnsembleModel mean({ConstantRegressor(2.0), ConstantRegressor(4.0), ConstantRegressor(9.0)},
                           EnsembleMode::kMeanPrediction);
  EXPECT_EQ(PredictEnsemble(mean, x), 5.0);
}

TEST(EnsembleTest, ModeTaskMismatchRejected) {
  EXPECT_THROW(EnsembleModel({ConstantRegressor(1.0)}, EnsembleMode::kMajorityVote),
               InvalidArgumentError);
  EXPECT_THROW(EnsembleModel({ConstantClassifier(0, 2)}, EnsembleMode::kMeanPrediction),
               InvalidArgumentError);
  EXPECT_THROW(EnsembleModel({}, EnsembleMode::kWeightAverage), InvalidArgumentError);
  EXPECT_EQ(DefaultEnsembleMode(Task::Classification(3)), EnsembleMode::kMajorityVote);
  EXPECT_EQ(DefaultEnsembleMode(Task::Regression()), EnsembleMode::kMeanPrediction);
  for (auto mode : {EnsembleMode::kMajorityVote, EnsembleMode::kMeanPrediction,
                    EnsembleMode::kWeightAverage}) {
    EXPECT_EQ(ParseEnsembleMode(ToString(mode)), mode);
  }
  EXPECT_THROW(ParseEnsembleMode("median"), InvalidArgumentError);
}

TEST(EnsembleTest, MergedInferenceIsOneForwardPass) {
  std::vector<ModelParams> members;
  for (uint64_t i = 0; i < 8; ++i) members.push_back(RandomModel(Arch67(), i));
  const EnsembleModel merged(members, EnsembleMode::kWeightAverage);
  const EnsembleModel vote(members, EnsembleMode::kMajorityVote);
  const std::vector<double> x = {0.1, -0.2, 0.3, 0.4};
  uint64_t before = ThreadForwardPassCount();
  merged.Predict(x);
  EXPECT_EQ(ThreadForwardPassCount() - before, 1u);
  before = ThreadForwardPassCount();
  vote.Predict(x);
  EXPECT_EQ(ThreadForwardPassCount() - before, 8u);
  ASSERT_TRUE(merged.merged().has_value());
  EXPECT_EQ(merged.Predict(x), Predict(*merged.merged(), x));
  EXPECT_TRUE(BitwiseEqual(*merged.merged(), WeightAverage(members)));
}

TEST(MergedModelOfRunTest, FollowsGenerationsAndCaches) {
  TempDir dir;
  const Dataset ds = BlobDataset(120, 12, 3, 3, 1);
  sisa::Run run = sisa::Run::Train(dir / "run", ds, MakeShardPlan(ds, 4, 2, 3), SmallConfig(3));
  const ModelParams gen0 = MergedModelOfRun(run);
  EXPECT_TRUE(std::filesystem::exists(run.GenerationDir(0) / "merged" / "model.txt"));
  EXPECT_TRUE(BitwiseEqual(MergedModelOfRun(run), gen0));

  const UnlearnOutcome out = ExecuteUnlearn(run, UnlearnRequest::ForUsers({"user4"}));
  const int changed = out.refreshed.at(0).first;
  std::vector<ModelParams> expected;
  for (const auto& [shard, model] : run.ShardModels(0)) {
    expected.push_back(shard == changed ? out.refreshed.at(0).second : model);
  }
  const ModelParams gen1 = MergedModelOfRun(run);
  EXPECT_TRUE(BitwiseEqual(gen1, WeightAverage(expected)));
  EXPECT_FALSE(BitwiseEqual(gen1, gen0));
  EXPECT_TRUE(BitwiseEqual(MergedModelOfRun(run, 0), gen0));

  const EnsembleModel ens = EnsembleOfRun(run, EnsembleMode::kWeightAverage);
  ASSERT_TRUE(ens.merged().has_value());
  EXPECT_TRUE(BitwiseEqual(*ens.merged(), gen1));
  EXPECT_EQ(EnsembleOfRun(run, EnsembleMode::kMajorityVote).members().size(), 4u);
}

TEST(MergedModelOfRunTest, RegressionRunUsesMean) {
  TempDir dir;
  const Dataset ds = LinearDataset(80, 8, 3, 2);
  sisa::Run run = sisa::Run::Train(dir / "run", ds, MakeShardPlan(ds, 2, 2, 1), SmallConfig(1));
  const EnsembleModel mean = EnsembleOfRun(run, EnsembleMode::kMeanPrediction);
  const auto models = run.ShardModels(0);
  const std::vector<double>& x = ds.points()[0].features;
  const double expected = (Predict(models[0].second, x) + Predict(models[1].second, x)) / 2.0;
  EXPECT_DOUBLE_EQ(mean.Predict(x), expected);
  EXPECT_THROW(EnsembleOfRun(run, EnsembleMode::kMajorityVote), InvalidArgumentError);
}

}  // namespace
}  // namespace sisa
