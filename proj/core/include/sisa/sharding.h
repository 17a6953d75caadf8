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

// K-shard, R-slice partition of a dataset.
//
// User-aware mode (the default) hashes each user to one shard, so erasing a
// user touches exactly one shard. Within a shard, points are dealt
// round-robin over the slices in dataset order, which keeps slice sizes
// within one of each other. Random mode shuffles points with a seeded
// permutation and deals them round-robin to shards, then slices.
//
// A plan is never recomputed after unlearning: retained points keep their
// (shard, slice) cell for the lifetime of a run.

#ifndef SISA_SHARDING_H_
#define SISA_SHARDING_H_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sisa/dataset.h"

namespace sisa {

enum class ShardMode { kUserAware, kRandom };

std::string ToString(ShardMode mode);
ShardMode ParseShardMode(std::string_view text);

struct Cell {
  int shard = 0;
  int slice = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct PlanEntry {
  PointId point_id = 0;
  std::string user_id;
  Cell cell;
};

// Points of one shard grouped by slice; each slice keeps dataset order.
using SliceLists = std::vector<std::vector<DataPoint>>;

class ShardPlan {
 public:
  ShardPlan() = default;
  // Validates the disjoint-cover invariant; entries are kept in the given
  // (dataset) order.
  ShardPlan(int num_shards, int num_slices, uint64_t master_seed,
            ShardMode mode, std::vector<PlanEntry> entries);

  int num_shards() const { return num_shards_; }
  int num_slices() const { return num_slices_; }
  uint64_t master_seed() const { return master_seed_; }
  ShardMode mode() const { return mode_; }
  const std::vector<PlanEntry>& entries() const { return entries_; }

  // Throws NotFoundError for an unknown point id.
  Cell CellOf(PointId id) const;
  bool HasPoint(PointId id) const;
  bool HasUser(std::string_view user_id) const;
  // Point ids owned by a user, in dataset order; throws NotFoundError.
  const std::vector<PointId>& PointsOfUser(std::string_view user_id) const;
  // User-aware mode only: the single shard hosting a user.
  int ShardOfUser(std::string_view user_id) const;

  // Points per shard.
  std::vector<size_t> ShardSizes() const;

  // Slice lists for `shard`, drawing points from `dataset` and skipping any
  // id in `removed`. Every plan point must be present in the dataset
  // unless it is removed.
  SliceLists SlicesFor(const Dataset& dataset, int shard,
                       const std::set<PointId>& removed = {}) const;

  friend bool operator==(const ShardPlan& a, const ShardPlan& b) {
    return a.num_shards_ == b.num_shards_ && a.num_slices_ == b.num_slices_ &&
           a.master_seed_ == b.master_seed_ && a.mode_ == b.mode_ &&
           a.entries_.size() == b.entries_.size() &&
           std::equal(a.entries_.begin(), a.entries_.end(),
                      b.entries_.begin(), [](const auto& x, const auto& y) {
                        return x.point_id == y.point_id &&
                               x.user_id == y.user_id && x.cell == y.cell;
                      });
  }

 private:
  void BuildIndex();

  int num_shards_ = 0;
  int num_slices_ = 0;
  uint64_t master_seed_ = 0;
  ShardMode mode_ = ShardMode::kUserAware;
  std::vector<PlanEntry> entries_;
  std::unordered_map<PointId, Cell> cell_of_;
  std::map<std::string, std::vector<PointId>, std::less<>> user_points_;
};

// Shard index for a user in user-aware mode: hash(user_id, seed) mod K.
int UserShard(std::string_view user_id, uint64_t master_seed, int num_shards);

// Throws InvalidArgumentError when K < 1, R < 1, the dataset is empty, a
// user-aware point has no user id, or any shard would receive no points.
ShardPlan MakeShardPlan(const Dataset& dataset, int num_shards, int num_slices,
                        uint64_t master_seed, bool user_aware = true);

// Text manifest: header keys then one `point_id,user_id,shard,slice` row per
// point in dataset order.
std::string FormatPlan(const ShardPlan& plan);
ShardPlan ParsePlan(std::string_view text);
void SavePlan(const ShardPlan& plan, const std::filesystem::path& path);
ShardPlan LoadPlan(const std::filesystem::path& path);

// An erasure demand naming users or points (exactly one form, non-empty).
class UnlearnRequest {
 public:
  static UnlearnRequest ForUsers(std::set<std::string> user_ids);
  static UnlearnRequest ForPoints(std::set<PointId> point_ids);

  bool by_users() const {
    return std::holds_alternative<std::set<std::string>>(ids_);
  }
  const std::set<std::string>& user_ids() const;
  const std::set<PointId>& point_ids() const;

  // Every point id the request erases; throws NotFoundError for an unknown
  // user or point.
  std::set<PointId> ResolvePoints(const ShardPlan& plan) const;

  // `users=a,b` or `points=1,2`.
  std::string ToString() const;
  static UnlearnRequest FromString(std::string_view text);

  friend bool operator==(const UnlearnRequest&,
                         const UnlearnRequest&) = default;

 private:
  explicit UnlearnRequest(std::variant<std::set<std::string>, std::set<PointId>> ids)
      : ids_(std::move(ids)) {}
  std::variant<std::set<std::string>, std::set<PointId>> ids_;
};

// shard -> earliest slice holding a removed point. Shards absent from the
// map are untouched by the request.
std::map<int, int> AffectedCells(const ShardPlan& plan,
                                 const UnlearnRequest& request);
std::map<int, int> AffectedCells(const ShardPlan& plan,
                                 const std::set<PointId>& removed);

// The dataset minus every point the request names, order and ids kept.
// Throws InvalidArgumentError when nothing would remain.
// Throws NotFoundError when the request names an id absent from the dataset.
Dataset RetainedView(const Dataset& dataset, const UnlearnRequest& request);
Dataset RetainedView(const Dataset& dataset, const std::set<PointId>& removed);

}  // namespace sisa

#endif  // SISA_SHARDING_H_
