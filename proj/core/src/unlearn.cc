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

#include "sisa/unlearn.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <system_error>

#include "sisa/errors.h"
#include "sisa/serialize.h"
#include "parallel.h"

namespace sisa {
namespace {

namespace fs = std::filesystem;

// Files of a shard directory, keyed by relative path.
std::map<std::string, std::string> ShardFiles(const fs::path& shard_dir) {
  std::map<std::string, std::string> files;
  if (!fs::exists(shard_dir)) throw NotFoundError("missing " + shard_dir.string());
  for (const auto& entry : fs::recursive_directory_iterator(shard_dir)) {
    if (!entry.is_regular_file()) continue;
    files[fs::relative(entry.path(), shard_dir).generic_string()] = ReadFile(entry.path());
  }
  return files;
}

fs::path ScratchDir(const std::string& tag) {
  static std::atomic<uint64_t> counter{0};
  const auto now = std::chrono::steady_clock::now().time_since_epoch().count();
  return fs::temp_directory_path() /
         ("sisa-" + tag + "-" + std::to_string(now) + "-" + std::to_string(counter++));
}

}  // namespace

double CostLedger::savings_ratio() const {
  if (optimizer_steps_full_retrain_baseline == 0) return 0.0;
  const double ratio = 1.0 - static_cast<double>(optimizer_steps_executed) /
                                 static_cast<double>(optimizer_steps_full_retrain_baseline);
  return std::clamp(ratio, 0.0, 1.0);
}

void CostLedger::WriteTo(KeyValueFile& kv, const std::string& prefix) const {
  kv.SetInt(prefix + "shards_retrained", shards_retrained);
  kv.SetInt(prefix + "stages_executed", stages_executed);
  kv.SetUint(prefix + "optimizer_steps_executed", optimizer_steps_executed);
  kv.SetUint(prefix + "optimizer_steps_full_retrain_baseline",
             optimizer_steps_full_retrain_baseline);
  kv.SetDouble(prefix + "savings_ratio", savings_ratio());
}

KeyValueFile UnlearnOutcome::ToReport() const {
  KeyValueFile kv;
  kv.Set("format", "sisa-unlearn-report/1");
  kv.SetInt("generation", generation);
  kv.SetInt("parent_generation", parent_generation);
  kv.Set("request", request.ToString());
  std::vector<std::string> cells;
  for (const auto& [shard, stage] : affected) {
    cells.push_back(std::to_string(shard) + ":" + std::to_string(stage));
  }
  kv.Set("affected", JoinStrings(cells, ','));
  std::vector<int64_t> refreshed_ids;
  for (const auto& [shard, model] : refreshed) refreshed_ids.push_back(shard);
  kv.SetIntList("refreshed_shards", refreshed_ids);
  kv.SetIntList("dropped_shards", std::vector<int64_t>(dropped_shards.begin(),
                                                       dropped_shards.end()));
  ledger.WriteTo(kv);
  return kv;
}

UnlearnOutcome ExecuteUnlearn(Run& run, const UnlearnRequest& request) {
  const ShardPlan& plan = run.plan();
  const GenerationInfo parent = run.CurrentGeneration();
  const std::set<PointId> erased = request.ResolvePoints(plan);
  for (PointId id : erased) {
    if (parent.removed.contains(id)) {
      throw NotFoundError("point " + std::to_string(id) +
                          " was already erased in an earlier generation");
    }
  }
  std::set<PointId> removed = parent.removed;
  removed.insert(erased.begin(), erased.end());
  const std::map<int, int> affected = AffectedCells(plan, erased);

  std::map<int, SliceLists> retained;
  std::vector<int> dropped;
  for (const auto& [shard, stage] : affected) {
    SliceLists slices = run.RetainedSlices(shard, removed);
    const bool empty = std::all_of(slices.begin(), slices.end(),
                                   [](const auto& s) { return s.empty(); });
    if (empty) {
      dropped.push_back(shard);
    } else {
      retained.emplace(shard, std::move(slices));
    }
  }
  std::vector<int> live;
  for (int shard : parent.live_shards) {
    if (std::find(dropped.begin(), dropped.end(), shard) == dropped.end()) {
      live.push_back(shard);
    }
  }
  Require(!live.empty(), "unlearn: the request would empty every shard");

  GenerationInfo info;
  info.id = parent.id + 1;
  info.parent = parent.id;
  info.request = request;
  info.removed = removed;
  info.live_shards = live;
  info.affected = affected;
  info.dropped_shards = dropped;

  const fs::path gen_dir = run.GenerationDir(info.id);
  if (fs::exists(gen_dir)) {
    if (fs::exists(gen_dir / "generation.txt")) {
      throw IntegrityError("generation " + std::to_string(info.id) +
                           " already exists but the run points at " +
                           std::to_string(parent.id));
    }
    fs::remove_all(gen_dir);  // leftover of an interrupted transaction
  }
  fs::create_directories(gen_dir);

  const CheckpointStore prior = run.Store(parent.id);
  const CheckpointStore next = run.Store(info.id);
  const int num_slices = plan.num_slices();
  for (int shard : live) {
    if (affected.contains(shard)) continue;
    for (int s = 0; s < num_slices; ++s) next.CopyFrom(prior, shard, s);
  }

  std::vector<int> jobs;
  for (const auto& [shard, slices] : retained) jobs.push_back(shard);
  std::vector<ShardTrainResult> results(jobs.size());
  internal::ParallelFor(jobs.size(), run.config().workers, [&](size_t i) {
    const int shard = jobs[i];
    results[i] = ResumeShard(prior, next, shard, affected.at(shard),
                             retained.at(shard), run.config());
  });

  UnlearnOutcome outcome;
  outcome.generation = info.id;
  outcome.parent_generation = parent.id;
  outcome.request = request;
  outcome.affected = affected;
  outcome.dropped_shards = dropped;
  for (size_t i = 0; i < jobs.size(); ++i) {
    outcome.ledger.shards_retrained += 1;
    outcome.ledger.stages_executed += results[i].stages_executed;
    outcome.ledger.optimizer_steps_executed += results[i].steps;
    outcome.refreshed.emplace_back(jobs[i], std::move(results[i].model));
  }
  for (int shard : live) {
    outcome.ledger.optimizer_steps_full_retrain_baseline +=
        ScheduledSteps(run.RetainedSlices(shard, removed), run.config(), 0);
  }

  outcome.ToReport().Save(gen_dir / "unlearn.txt");
  run.Commit(info);
  return outcome;
}

bool ErasureReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ErasureCheck& c) { return c.passed; });
}

KeyValueFile ErasureReport::ToReport() const {
  KeyValueFile kv;
  kv.Set("format", "sisa-verify-report/1");
  kv.SetInt("before_generation", before_generation);
  kv.SetInt("after_generation", after_generation);
  for (const ErasureCheck& c : checks) {
    kv.Set("check." + c.name, c.passed ? "pass" : "fail");
    if (!c.detail.empty()) kv.Set("detail." + c.name, c.detail);
  }
  kv.Set("result", passed() ? "pass" : "fail");
  return kv;
}

ErasureReport VerifyErasure(const Run& run, int before_generation,
                            int after_generation) {
  const GenerationInfo before = run.LoadGeneration(before_generation);
  const GenerationInfo after = run.LoadGeneration(after_generation);
  if (!after.parent || *after.parent != before.id) {
    throw IntegrityError("generation " + std::to_string(after.id) +
                         " was not produced from generation " + std::to_string(before.id));
  }
  const int num_slices = run.plan().num_slices();
  const CheckpointStore before_store = run.Store(before.id);
  const CheckpointStore after_store = run.Store(after.id);

  ErasureReport report;
  report.before_generation = before.id;
  report.after_generation = after.id;

  // (a) no erased id in any training set of the new generation.
  {
    ErasureCheck check{"no_removed_points", true, ""};
    try {
      for (int shard : after.live_shards) {
        for (int s = 0; s < num_slices && check.passed; ++s) {
          for (PointId id : after_store.Read(shard, s).points) {
            if (after.removed.contains(id)) {
              check.passed = false;
              check.detail = "point " + std::to_string(id) + " in shard " +
                             std::to_string(shard) + " stage " + std::to_string(s);
              break;
            }
          }
        }
      }
    } catch (const Error& e) {
      check.passed = false;
      check.detail = e.what();
    }
    report.checks.push_back(check);
  }

  // (b) affected shards equal a from-scratch retrain on their retained data.
  {
    ErasureCheck check{"oracle_retrain", true, ""};
    const fs::path scratch = ScratchDir("oracle");
    try {
      const CheckpointStore oracle_store(scratch);
      for (const auto& [shard, stage] : after.affected) {
        const bool live = std::find(after.live_shards.begin(), after.live_shards.end(),
                                    shard) != after.live_shards.end();
        const SliceLists slices = run.RetainedSlices(shard, after.removed);
        if (!live) {
          const bool empty = std::all_of(slices.begin(), slices.end(),
                                         [](const auto& s) { return s.empty(); });
          if (!empty) {
            check.passed = false;
            check.detail = "shard " + std::to_string(shard) + " was dropped but still has data";
            break;
          }
          continue;
        }
        const ModelParams oracle = TrainShard(slices, run.config(), shard, oracle_store).model;
        const ModelParams stored = after_store.ReadModel(shard, num_slices - 1);
        if (oracle.arch != stored.arch ||
            EncodeDoubles(oracle.params) != EncodeDoubles(stored.params)) {
          check.passed = false;
          check.detail = "shard " + std::to_string(shard) +
                         " differs from a from-scratch retrain on its retained data";
          break;
        }
      }
    } catch (const Error& e) {
      check.passed = false;
      check.detail = e.what();
    }
    std::error_code ec;
    fs::remove_all(scratch, ec);
    report.checks.push_back(check);
  }

  // (c) untouched shards are byte-identical.
  {
    ErasureCheck check{"unaffected_intact", true, ""};
    try {
      for (int shard : before.live_shards) {
        if (after.affected.contains(shard)) continue;
        const fs::path rel = before_store.StageDir(shard, 0).parent_path().filename();
        if (ShardFiles(before_store.root() / rel) != ShardFiles(after_store.root() / rel)) {
          check.passed = false;
          check.detail = "shard " + std::to_string(shard) + " changed";
          break;
        }
      }
    } catch (const Error& e) {
      check.passed = false;
      check.detail = e.what();
    }
    report.checks.push_back(check);
  }
  return report;
}

}  // namespace sisa
