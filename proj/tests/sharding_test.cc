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

#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sisa/errors.h"
#include "sisa/sharding.h"
#include "test_util.h"

namespace sisa {
namespace {

using ::sisa::testing::BlobDataset;
using ::sisa::testing::TempDir;

// n points, each with its own user.
Dataset DistinctUsers(int n) {
  std::vector<DataPoint> points;
  for (int i = 0; i < n; ++i) {
    points.push_back({static_cast<PointId>(i), "p" + std::to_string(i), {0.0}, 0.0});
  }
  return Dataset(std::move(points), 1, Task::Regression());
}

void ExpectBalanced(const ShardPlan& plan, size_t lo, size_t hi) {
  std::vector<std::vector<size_t>> cells(plan.num_shards(), std::vector<size_t>(plan.num_slices(), 0));
  for (const PlanEntry& e : plan.entries()) ++cells[e.cell.shard][e.cell.slice];
  for (int k = 0; k < plan.num_shards(); ++k) {
    size_t total = 0, mn = SIZE_MAX, mx = 0;
    for (size_t c : cells[k]) {
      total += c;
      mn = std::min(mn, c);
      mx = std::max(mx, c);
    }
    EXPECT_GE(total, lo) << "shard " << k;
    EXPECT_LE(total, hi) << "shard " << k;
    EXPECT_LE(mx - mn, 1u) << "shard " << k;
  }
}

TEST(ShardPlanTest, SingleCellDegenerate) {
  const Dataset ds = BlobDataset(50, 5, 3, 2, 1);
  for (bool user_aware : {true, false}) {
    const ShardPlan plan = MakeShardPlan(ds, 1, 1, 3, user_aware);
    for (const PlanEntry& e : plan.entries()) EXPECT_EQ(e.cell, (Cell{0, 0}));
  }
}

TEST(ShardPlanTest, BalanceBoundRandomMode) {
  const ShardPlan plan = MakeShardPlan(DistinctUsers(1000), 4, 2, 7, false);
  ExpectBalanced(plan, 200, 300);
}

TEST(ShardPlanTest, BalanceBoundUserAwareManyUsers) {
  const ShardPlan plan = MakeShardPlan(DistinctUsers(1000), 4, 2, 7, true);
  ExpectBalanced(plan, 200, 300);
}

TEST(ShardPlanTest, SlicesBalancedWithinEveryShard) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset ds = BlobDataset(300, 25, 2, 3, seed);
    ExpectBalanced(MakeShardPlan(ds, 3, 4, seed, true), 1, 300);
    ExpectBalanced(MakeShardPlan(ds, 5, 3, seed, false), 1, 300);
  }
}

TEST(ShardPlanTest, UserLocality) {
  const Dataset ds = BlobDataset(400, 37, 2, 3, 2);
  for (int k : {2, 4, 8}) {
    const ShardPlan plan = MakeShardPlan(ds, k, 2, 11, true);
    std::map<std::string, int> shard_of;
    for (const PlanEntry& e : plan.entries()) {
      auto [it, fresh] = shard_of.emplace(e.user_id, e.cell.shard);
      EXPECT_EQ(it->second, e.cell.shard) << e.user_id;
      EXPECT_EQ(plan.ShardOfUser(e.user_id), e.cell.shard);
      EXPECT_EQ(UserShard(e.user_id, 11, k), e.cell.shard);
    }
  }
}

TEST(ShardPlanTest, PartitionProperty) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset ds = BlobDataset(97, 13, 2, 3, seed);
    for (bool user_aware : {true, false}) {
      const int k = 1 + static_cast<int>(seed % 3);
      const ShardPlan plan = MakeShardPlan(ds, k, 1 + static_cast<int>(seed % 4), seed, user_aware);
      ASSERT_EQ(plan.entries().size(), ds.size());
      std::set<PointId> seen;
      size_t total = 0;
      for (size_t n : plan.ShardSizes()) total += n;
      EXPECT_EQ(total, ds.size());
      for (size_t i = 0; i < ds.size(); ++i) {
        EXPECT_EQ(plan.entries()[i].point_id, ds.points()[i].point_id);
        EXPECT_TRUE(seen.insert(plan.entries()[i].point_id).second);
      }
      // Slice lists reproduce the same disjoint cover.
      std::set<PointId> from_slices;
      for (int s = 0; s < plan.num_shards(); ++s) {
        for (const auto& slice : plan.SlicesFor(ds, s)) {
          for (const DataPoint& p : slice) {
            EXPECT_TRUE(from_slices.insert(p.point_id).second);
            EXPECT_EQ(plan.CellOf(p.point_id).shard, s);
          }
        }
      }
      EXPECT_EQ(from_slices, seen);
    }
  }
}

TEST(ShardPlanTest, Deterministic) {
  const Dataset ds = BlobDataset(200, 20, 2, 3, 4);
  for (bool user_aware : {true, false}) {
    EXPECT_EQ(MakeShardPlan(ds, 4, 2, 9, user_aware), MakeShardPlan(ds, 4, 2, 9, user_aware));
  }
  EXPECT_FALSE(MakeShardPlan(ds, 4, 2, 9, false) == MakeShardPlan(ds, 4, 2, 10, false));
}

TEST(ShardPlanTest, FileRoundTrip) {
  TempDir dir;
  const Dataset ds = BlobDataset(120, 12, 2, 3, 5);
  for (bool user_aware : {true, false}) {
    const ShardPlan plan = MakeShardPlan(ds, 3, 2, 21, user_aware);
    SavePlan(plan, dir / "plan.txt");
    EXPECT_EQ(LoadPlan(dir / "plan.txt"), plan);
    EXPECT_EQ(FormatPlan(ParsePlan(FormatPlan(plan))), FormatPlan(plan));
  }
}

TEST(ShardPlanTest, EmptyShardRejected) {
  const Dataset ds = BlobDataset(40, 2, 2, 2, 1);
  EXPECT_THROW(MakeShardPlan(ds, 8, 1, 0, true), InvalidArgumentError);
  EXPECT_THROW(MakeShardPlan(DistinctUsers(3), 4, 1, 0, false), InvalidArgumentError);
}

TEST(ShardPlanTest, RejectsBadArguments) {
  const Dataset ds = BlobDataset(10, 2, 2, 2, 1);
  EXPECT_THROW(MakeShardPlan(ds, 0, 1, 0), InvalidArgumentError);
  EXPECT_THROW(MakeShardPlan(ds, 1, 0, 0), InvalidArgumentError);
  EXPECT_THROW(MakeShardPlan(Dataset(), 1, 1, 0), InvalidArgumentError);
}

// Hand-written plan: users a (shard 2, slices 0 and 1), b (shard 0), c (shard 1).
ShardPlan HandPlan() {
  return ShardPlan(3, 2, 0, ShardMode::kUserAware,
                   {{1, "a", {2, 0}}, {2, "a", {2, 1}}, {3, "b", {0, 1}},
                    {4, "c", {1, 0}}, {5, "c", {1, 1}}, {6, "d", {2, 1}}});
}

TEST(AffectedCellsTest, Examples) {
  const ShardPlan plan = HandPlan();
  EXPECT_EQ(AffectedCells(plan, UnlearnRequest::ForUsers({"a"})), (std::map<int, int>{{2, 0}}));
  EXPECT_EQ(AffectedCells(plan, UnlearnRequest::ForPoints({3})), (std::map<int, int>{{0, 1}}));
  EXPECT_EQ(AffectedCells(plan, UnlearnRequest::ForUsers({"b", "c"})),
            (std::map<int, int>{{0, 1}, {1, 0}}));
  EXPECT_EQ(AffectedCells(plan, UnlearnRequest::ForPoints({2, 6})), (std::map<int, int>{{2, 1}}));
}

TEST(AffectedCellsTest, UnknownIdsRejected) {
  const ShardPlan plan = HandPlan();
  EXPECT_THROW(AffectedCells(plan, UnlearnRequest::ForUsers({"zz"})), NotFoundError);
  EXPECT_THROW(AffectedCells(plan, UnlearnRequest::ForPoints({99})), NotFoundError);
}

TEST(AffectedCellsTest, UserLocalityBound) {
  const Dataset ds = BlobDataset(300, 30, 2, 3, 8);
  const ShardPlan plan = MakeShardPlan(ds, 4, 3, 5, true);
  for (int a = 0; a < 30; ++a) {
    for (int b = a; b < 30; b += 7) {
      std::set<std::string> users = {"user" + std::to_string(a), "user" + std::to_string(b)};
      const auto cells = AffectedCells(plan, UnlearnRequest::ForUsers(users));
      EXPECT_LE(cells.size(), users.size());
      // Minimum slice matches a direct scan.
      std::map<int, int> scan;
      for (const PlanEntry& e : plan.entries()) {
        if (!users.contains(e.user_id)) continue;
        auto [it, fresh] = scan.emplace(e.cell.shard, e.cell.slice);
        if (!fresh) it->second = std::min(it->second, e.cell.slice);
      }
      EXPECT_EQ(cells, scan);
    }
  }
}

TEST(UnlearnRequestTest, FormsAndText) {
  EXPECT_THROW(UnlearnRequest::ForUsers({}), InvalidArgumentError);
  EXPECT_THROW(UnlearnRequest::ForPoints({}), InvalidArgumentError);
  const UnlearnRequest u = UnlearnRequest::ForUsers({"b", "a"});
  EXPECT_EQ(u.ToString(), "users=a,b");
  EXPECT_EQ(UnlearnRequest::FromString(u.ToString()), u);
  const UnlearnRequest p = UnlearnRequest::ForPoints({10, 2});
  EXPECT_EQ(p.ToString(), "points=2,10");
  EXPECT_EQ(UnlearnRequest::FromString(p.ToString()), p);
  const ShardPlan plan(1, 1, 0, ShardMode::kRandom, {{2, "x", {0, 0}}, {10, "y", {0, 0}}});
  EXPECT_EQ(p.ResolvePoints(plan), (std::set<PointId>{2, 10}));
  EXPECT_EQ(UnlearnRequest::ForUsers({"y"}).ResolvePoints(plan), (std::set<PointId>{10}));
}

TEST(RetainedViewTest, KeepsIdsAndOrder) {
  std::vector<DataPoint> pts = {{5, "a", {1.0}, 0.0}, {9, "b", {2.0}, 1.0}, {7, "c", {3.0}, 2.0}};
  const Dataset ds(pts, 1, Task::Regression());
  const Dataset kept = RetainedView(ds, UnlearnRequest::ForPoints({9}));
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept.points()[0].point_id, 5u);
  EXPECT_EQ(kept.points()[1].point_id, 7u);
  EXPECT_EQ(kept.points()[1].features, std::vector<double>{3.0});
  EXPECT_THROW(RetainedView(ds, UnlearnRequest::ForUsers({"a", "b", "c"})), InvalidArgumentError);
  EXPECT_THROW(RetainedView(ds, UnlearnRequest::ForUsers({"q"})), NotFoundError);
}

TEST(RetainedViewTest, ThirtyPointUserFromLargeSet) {
  // 248 users over 7442 points gives blocks of 30 or 31.
  const Dataset ds = BlobDataset(7442, 248, 2, 2, 3);
  std::map<std::string, int> counts;
  for (const DataPoint& p : ds.points()) ++counts[p.user_id];
  std::string victim;
  for (const auto& [user, n] : counts) {
    if (n == 30) {
      victim = user;
      break;
    }
  }
  ASSERT_FALSE(victim.empty());
  const Dataset kept = RetainedView(ds, UnlearnRequest::ForUsers({victim}));
  EXPECT_EQ(kept.size(), 7412u);
  for (const DataPoint& p : kept.points()) EXPECT_NE(p.user_id, victim);
}

}  // namespace
}  // namespace sisa
