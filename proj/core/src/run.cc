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

#include "sisa/run.h"

#include <system_error>

#include "sisa/errors.h"
#include "sisa/kv.h"
#include "parallel.h"

namespace sisa {
namespace {

namespace fs = std::filesystem;

std::string GenerationName(int generation) {
  std::string s = std::to_string(generation);
  if (s.size() < 4) s.insert(0, 4 - s.size(), '0');
  return "gen-" + s;
}

std::vector<int64_t> ToInt64(const std::vector<int>& v) {
  return {v.begin(), v.end()};
}

std::vector<int> ToInt(const std::vector<int64_t>& v) {
  std::vector<int> out;
  out.reserve(v.size());
  for (int64_t x : v) out.push_back(static_cast<int>(x));
  return out;
}

void CheckPlanCoversDataset(const Dataset& dataset, const ShardPlan& plan) {
  Require(plan.entries().size() == dataset.size(),
          "run: plan covers " + std::to_string(plan.entries().size()) +
              " points but the dataset has " + std::to_string(dataset.size()));
  for (const DataPoint& p : dataset.points()) {
    Require(plan.HasPoint(p.point_id),
            "run: point " + std::to_string(p.point_id) + " is missing from the plan");
  }
}

}  // namespace

KeyValueFile GenerationInfo::ToKeyValue() const {
  KeyValueFile kv;
  kv.Set("format", "sisa-generation/1");
  kv.SetInt("generation", id);
  kv.Set("parent", parent ? std::to_string(*parent) : "none");
  kv.Set("request", request ? request->ToString() : "none");
  kv.SetUintList("removed", std::vector<uint64_t>(removed.begin(), removed.end()));
  kv.SetIntList("live_shards", ToInt64(live_shards));
  std::vector<std::string> cells;
  for (const auto& [shard, stage] : affected) {
    cells.push_back(std::to_string(shard) + ":" + std::to_string(stage));
  }
  kv.Set("affected", JoinStrings(cells, ','));
  kv.SetIntList("dropped_shards", ToInt64(dropped_shards));
  return kv;
}

GenerationInfo GenerationInfo::FromKeyValue(const KeyValueFile& kv) {
  if (kv.Get("format") != "sisa-generation/1") {
    throw IoError("generation: unsupported format");
  }
  GenerationInfo info;
  info.id = static_cast<int>(kv.GetInt("generation"));
  if (kv.Get("parent") != "none") info.parent = static_cast<int>(kv.GetInt("parent"));
  if (kv.Get("request") != "none") {
    info.request = UnlearnRequest::FromString(kv.Get("request"));
  }
  for (uint64_t id : kv.GetUintList("removed")) info.removed.insert(id);
  info.live_shards = ToInt(kv.GetIntList("live_shards"));
  for (const std::string& cell : kv.GetStringList("affected")) {
    const std::vector<std::string> parts = SplitString(cell, ':');
    if (parts.size() != 2) throw IoError("generation: malformed affected cell '" + cell + "'");
    info.affected[static_cast<int>(ParseInt(parts[0]))] = static_cast<int>(ParseInt(parts[1]));
  }
  info.dropped_shards = ToInt(kv.GetIntList("dropped_shards"));
  return info;
}

Run Run::Train(const fs::path& dir, const Dataset& dataset,
               const ShardPlan& plan, const TrainConfig& cfg) {
  Require(!fs::exists(dir) || fs::is_empty(dir),
          "run: output directory " + dir.string() + " is not empty");
  CheckPlanCoversDataset(dataset, plan);
  cfg.Validate();

  Run run;
  run.dir_ = dir;
  run.dataset_ = dataset;
  run.plan_ = plan;
  run.config_ = cfg.WithArchFor(dataset.feature_dim(), dataset.task());

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  SaveFeatureFile(dataset, dir / "data.csv");
  SavePlan(plan, dir / "plan.txt");
  run.config_.ToKeyValue().Save(dir / "config.txt");

  const CheckpointStore store = run.Store(0);
  fs::create_directories(store.root(), ec);
  const int num_shards = plan.num_shards();
  internal::ParallelFor(num_shards, run.config_.workers, [&](size_t k) {
    const int shard = static_cast<int>(k);
    TrainShard(plan.SlicesFor(dataset, shard), run.config_, shard, store);
  });

  GenerationInfo info;
  info.id = 0;
  for (int k = 0; k < num_shards; ++k) info.live_shards.push_back(k);
  run.Commit(info);
  return run;
}

Run Run::Open(const fs::path& dir) {
  const fs::path pointer = dir / "run.txt";
  if (!fs::exists(pointer)) throw NotFoundError("no run at " + dir.string());
  const KeyValueFile kv = KeyValueFile::Load(pointer);
  if (kv.Get("format") != "sisa-run/1") throw IoError("run: unsupported format");
  Run run;
  run.dir_ = dir;
  run.current_ = static_cast<int>(kv.GetInt("current_generation"));
  run.dataset_ = LoadFeatureFile(dir / "data.csv");
  run.plan_ = LoadPlan(dir / "plan.txt");
  run.config_ = TrainConfig::FromKeyValue(KeyValueFile::Load(dir / "config.txt"))
                    .WithArchFor(run.dataset_.feature_dim(), run.dataset_.task());
  CheckPlanCoversDataset(run.dataset_, run.plan_);
  return run;
}

fs::path Run::GenerationDir(int generation) const {
  return dir_ / GenerationName(generation);
}

CheckpointStore Run::Store(int generation) const {
  return CheckpointStore(GenerationDir(generation));
}

GenerationInfo Run::LoadGeneration(int generation) const {
  const fs::path file = GenerationDir(generation) / "generation.txt";
  if (!fs::exists(file)) {
    throw NotFoundError("generation " + std::to_string(generation) +
                        " does not exist in " + dir_.string());
  }
  GenerationInfo info = GenerationInfo::FromKeyValue(KeyValueFile::Load(file));
  if (info.id != generation) {
    throw IntegrityError("generation directory " + GenerationName(generation) +
                         " holds generation " + std::to_string(info.id));
  }
  return info;
}

SliceLists Run::RetainedSlices(int shard, const std::set<PointId>& removed) const {
  return plan_.SlicesFor(dataset_, shard, removed);
}

std::vector<std::pair<int, ModelParams>> Run::ShardModels(int generation) const {
  const GenerationInfo info = LoadGeneration(generation);
  const CheckpointStore store = Store(generation);
  std::vector<std::pair<int, ModelParams>> models;
  for (int shard : info.live_shards) {
    models.emplace_back(shard, store.ReadModel(shard, plan_.num_slices() - 1));
  }
  return models;
}

void Run::Commit(const GenerationInfo& info) {
  const fs::path gen_dir = GenerationDir(info.id);
  std::error_code ec;
  fs::create_directories(gen_dir, ec);
  if (fs::exists(gen_dir / "generation.txt")) {
    throw IntegrityError("generation " + std::to_string(info.id) + " is already committed");
  }
  info.ToKeyValue().Save(gen_dir / "generation.txt");
  current_ = info.id;
  WritePointer();
}

void Run::WritePointer() const {
  KeyValueFile kv;
  kv.Set("format", "sisa-run/1");
  kv.SetInt("current_generation", current_);
  kv.Save(dir_ / "run.txt");
}

int Run::ParseGenerationDir(const fs::path& path) {
  fs::path p = path;
  if (p.filename().empty()) p = p.parent_path();
  const std::string name = p.filename().string();
  if (name.rfind("gen-", 0) != 0) {
    throw InvalidArgumentError("'" + path.string() + "' is not a generation directory");
  }
  return static_cast<int>(ParseInt(name.substr(4)));
}

}  // namespace sisa
