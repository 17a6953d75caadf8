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

#include "sisa/sharding.h"

#include <numeric>
#include <span>

#include "sisa/errors.h"
#include "sisa/kv.h"
#include "sisa/rng.h"

namespace sisa {
namespace {

constexpr std::string_view kPointsMarker = "[points]";

}  // namespace

std::string ToString(ShardMode mode) {
  return mode == ShardMode::kUserAware ? "user_aware" : "random";
}

ShardMode ParseShardMode(std::string_view text) {
  if (text == "user_aware") return ShardMode::kUserAware;
  if (text == "random") return ShardMode::kRandom;
  throw InvalidArgumentError("unknown shard mode '" + std::string(text) + "'");
}

ShardPlan::ShardPlan(int num_shards, int num_slices, uint64_t master_seed,
                     ShardMode mode, std::vector<PlanEntry> entries)
    : num_shards_(num_shards),
      num_slices_(num_slices),
      master_seed_(master_seed),
      mode_(mode),
      entries_(std::move(entries)) {
  Require(num_shards >= 1, "plan: K must be >= 1");
  Require(num_slices >= 1, "plan: R must be >= 1");
  for (const PlanEntry& e : entries_) {
    Require(e.cell.shard >= 0 && e.cell.shard < num_shards &&
                e.cell.slice >= 0 && e.cell.slice < num_slices,
            "plan: point " + std::to_string(e.point_id) + " has an out-of-range cell");
  }
  BuildIndex();
  if (mode_ == ShardMode::kUserAware) {
    for (const auto& [user, ids] : user_points_) {
      const int shard = cell_of_.at(ids.front()).shard;
      for (PointId id : ids) {
        Require(cell_of_.at(id).shard == shard,
                "plan: user '" + user + "' spans several shards in user-aware mode");
      }
    }
  }
}

void ShardPlan::BuildIndex() {
  cell_of_.reserve(entries_.size());
  for (const PlanEntry& e : entries_) {
    Require(cell_of_.emplace(e.point_id, e.cell).second,
            "plan: point " + std::to_string(e.point_id) + " assigned twice");
    user_points_[e.user_id].push_back(e.point_id);
  }
}

Cell ShardPlan::CellOf(PointId id) const {
  const auto it = cell_of_.find(id);
  if (it == cell_of_.end()) {
    throw NotFoundError("point " + std::to_string(id) + " is not in the plan");
  }
  return it->second;
}

bool ShardPlan::HasPoint(PointId id) const { return cell_of_.contains(id); }

bool ShardPlan::HasUser(std::string_view user_id) const {
  return user_points_.find(user_id) != user_points_.end();
}

const std::vector<PointId>& ShardPlan::PointsOfUser(
    std::string_view user_id) const {
  const auto it = user_points_.find(user_id);
  if (it == user_points_.end()) {
    throw NotFoundError("user '" + std::string(user_id) + "' is not in the plan");
  }
  return it->second;
}

int ShardPlan::ShardOfUser(std::string_view user_id) const {
  Require(mode_ == ShardMode::kUserAware,
          "plan: users map to a single shard only in user-aware mode");
  return CellOf(PointsOfUser(user_id).front()).shard;
}

std::vector<size_t> ShardPlan::ShardSizes() const {
  std::vector<size_t> sizes(num_shards_, 0);
  for (const PlanEntry& e : entries_) ++sizes[e.cell.shard];
  return sizes;
}

SliceLists ShardPlan::SlicesFor(const Dataset& dataset, int shard,
                                const std::set<PointId>& removed) const {
  Require(shard >= 0 && shard < num_shards_, "plan: shard index out of range");
  SliceLists slices(num_slices_);
  for (const PlanEntry& e : entries_) {
    if (e.cell.shard != shard || removed.contains(e.point_id)) continue;
    slices[e.cell.slice].push_back(dataset.points()[dataset.IndexOf(e.point_id)]);
  }
  return slices;
}

int UserShard(std::string_view user_id, uint64_t master_seed, int num_shards) {
  const uint64_t h = Mix64(Fnv1a64(user_id) ^ Mix64(master_seed));
  return static_cast<int>(h % static_cast<uint64_t>(num_shards));
}

ShardPlan MakeShardPlan(const Dataset& dataset, int num_shards, int num_slices,
                        uint64_t master_seed, bool user_aware) {
  Require(num_shards >= 1, "plan: K must be >= 1");
  Require(num_slices >= 1, "plan: R must be >= 1");
  Require(!dataset.empty(), "plan: dataset is empty");
  const auto& points = dataset.points();
  std::vector<PlanEntry> entries(points.size());

  if (user_aware) {
    std::vector<int> dealt(num_shards, 0);
    for (size_t i = 0; i < points.size(); ++i) {
      Require(!points[i].user_id.empty(),
              "plan: user-aware mode needs a user id on every point (point " +
                  std::to_string(points[i].point_id) + ")");
      const int shard = UserShard(points[i].user_id, master_seed, num_shards);
      entries[i] = {points[i].point_id, points[i].user_id,
                    {shard, dealt[shard]++ % num_slices}};
    }
  } else {
    std::vector<size_t> order(points.size());
    std::iota(order.begin(), order.end(), size_t{0});
    RngStream rng({master_seed, kNoIndex, kNoIndex, "plan"});
    rng.Shuffle(std::span<size_t>(order));
    for (size_t rank = 0; rank < order.size(); ++rank) {
      const size_t i = order[rank];
      const int shard = static_cast<int>(rank % num_shards);
      const int slice = static_cast<int>((rank / num_shards) % num_slices);
      entries[i] = {points[i].point_id, points[i].user_id, {shard, slice}};
    }
  }

  ShardPlan plan(num_shards, num_slices, master_seed,
                 user_aware ? ShardMode::kUserAware : ShardMode::kRandom,
                 std::move(entries));
  const std::vector<size_t> sizes = plan.ShardSizes();
  for (int k = 0; k < num_shards; ++k) {
    if (sizes[k] == 0) {
      throw InvalidArgumentError(
          "plan: shard " + std::to_string(k) + " of " +
          std::to_string(num_shards) +
          " received no points (too few users for this shard count?)");
    }
  }
  return plan;
}

std::string FormatPlan(const ShardPlan& plan) {
  KeyValueFile kv;
  kv.Set("format", "sisa-plan/1");
  kv.SetInt("num_shards", plan.num_shards());
  kv.SetInt("num_slices", plan.num_slices());
  kv.SetUint("master_seed", plan.master_seed());
  kv.Set("mode", ToString(plan.mode()));
  kv.SetUint("num_points", plan.entries().size());
  std::string out = kv.Format();
  out += kPointsMarker;
  out += '\n';
  for (const PlanEntry& e : plan.entries()) {
    out += std::to_string(e.point_id) + ',' + e.user_id + ',' +
           std::to_string(e.cell.shard) + ',' + std::to_string(e.cell.slice) + '\n';
  }
  return out;
}

ShardPlan ParsePlan(std::string_view text) {
  const size_t marker = text.find(std::string(kPointsMarker) + "\n");
  if (marker == std::string_view::npos) throw IoError("plan: missing [points] section");
  const KeyValueFile kv = KeyValueFile::Parse(text.substr(0, marker));
  if (kv.Get("format") != "sisa-plan/1") throw IoError("plan: unsupported format");
  std::vector<PlanEntry> entries;
  for (const std::string& line :
       SplitString(text.substr(marker + kPointsMarker.size() + 1), '\n')) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = SplitString(line, ',');
    if (cells.size() != 4) throw IoError("plan: malformed row '" + line + "'");
    entries.push_back({ParseUint(cells[0]), cells[1],
                       {static_cast<int>(ParseInt(cells[2])),
                        static_cast<int>(ParseInt(cells[3]))}});
  }
  if (entries.size() != kv.GetUint("num_points")) {
    throw IntegrityError("plan: row count does not match num_points");
  }
  try {
    return ShardPlan(static_cast<int>(kv.GetInt("num_shards")),
                     static_cast<int>(kv.GetInt("num_slices")),
                     kv.GetUint("master_seed"), ParseShardMode(kv.Get("mode")),
                     std::move(entries));
  } catch (const InvalidArgumentError& e) {
    throw IoError(e.what());
  }
}

void SavePlan(const ShardPlan& plan, const std::filesystem::path& path) {
  WriteFileAtomic(path, FormatPlan(plan));
}

ShardPlan LoadPlan(const std::filesystem::path& path) {
  return ParsePlan(ReadFile(path));
}

UnlearnRequest UnlearnRequest::ForUsers(std::set<std::string> user_ids) {
  Require(!user_ids.empty(), "request: user set is empty");
  for (const std::string& u : user_ids) Require(!u.empty(), "request: empty user id");
  return UnlearnRequest(std::move(user_ids));
}

UnlearnRequest UnlearnRequest::ForPoints(std::set<PointId> point_ids) {
  Require(!point_ids.empty(), "request: point set is empty");
  return UnlearnRequest(std::move(point_ids));
}

const std::set<std::string>& UnlearnRequest::user_ids() const {
  Require(by_users(), "request names points, not users");
  return std::get<std::set<std::string>>(ids_);
}

const std::set<PointId>& UnlearnRequest::point_ids() const {
  Require(!by_users(), "request names users, not points");
  return std::get<std::set<PointId>>(ids_);
}

std::set<PointId> UnlearnRequest::ResolvePoints(const ShardPlan& plan) const {
  std::set<PointId> out;
  if (by_users()) {
    for (const std::string& u : user_ids()) {
      const auto& ids = plan.PointsOfUser(u);
      out.insert(ids.begin(), ids.end());
    }
  } else {
    for (PointId id : point_ids()) {
      if (!plan.HasPoint(id)) {
        throw NotFoundError("point " + std::to_string(id) + " is not in the plan");
      }
      out.insert(id);
    }
  }
  return out;
}

std::string UnlearnRequest::ToString() const {
  std::vector<std::string> parts;
  if (by_users()) {
    parts.assign(user_ids().begin(), user_ids().end());
    return "users=" + JoinStrings(parts, ',');
  }
  for (PointId id : point_ids()) parts.push_back(std::to_string(id));
  return "points=" + JoinStrings(parts, ',');
}

UnlearnRequest UnlearnRequest::FromString(std::string_view text) {
  const size_t eq = text.find('=');
  if (eq == std::string_view::npos) throw IoError("request: expected users=... or points=...");
  const std::string_view kind = text.substr(0, eq);
  const std::vector<std::string> parts = SplitString(text.substr(eq + 1), ',');
  if (kind == "users") return ForUsers({parts.begin(), parts.end()});
  if (kind == "points") {
    std::set<PointId> ids;
    for (const std::string& p : parts) ids.insert(ParseUint(p));
    return ForPoints(std::move(ids));
  }
  throw IoError("request: unknown kind '" + std::string(kind) + "'");
}

std::map<int, int> AffectedCells(const ShardPlan& plan,
                                 const std::set<PointId>& removed) {
  std::map<int, int> affected;
  for (PointId id : removed) {
    const Cell cell = plan.CellOf(id);
    auto [it, inserted] = affected.emplace(cell.shard, cell.slice);
    if (!inserted) it->second = std::min(it->second, cell.slice);
  }
  return affected;
}

std::map<int, int> AffectedCells(const ShardPlan& plan,
                                 const UnlearnRequest& request) {
  return AffectedCells(plan, request.ResolvePoints(plan));
}

Dataset RetainedView(const Dataset& dataset, const std::set<PointId>& removed) {
  std::vector<DataPoint> kept;
  kept.reserve(dataset.size());
  for (const DataPoint& p : dataset.points()) {
    if (!removed.contains(p.point_id)) kept.push_back(p);
  }
  Require(!kept.empty(), "retained view: the request removes every point");
  return Dataset(std::move(kept), dataset.feature_dim(), dataset.task());
}

Dataset RetainedView(const Dataset& dataset, const UnlearnRequest& request) {
  std::set<PointId> removed;
  if (request.by_users()) {
    std::set<std::string> seen;
    for (const DataPoint& p : dataset.points()) {
      if (request.user_ids().contains(p.user_id)) {
        removed.insert(p.point_id);
        seen.insert(p.user_id);
      }
    }
    for (const std::string& u : request.user_ids()) {
      if (!seen.contains(u)) throw NotFoundError("user '" + u + "' has no points");
    }
  } else {
    for (PointId id : request.point_ids()) {
      if (!dataset.Contains(id)) {
        throw NotFoundError("point " + std::to_string(id) + " is not in the dataset");
      }
    }
    removed = request.point_ids();
  }
  return RetainedView(dataset, removed);
}

}  // namespace sisa
