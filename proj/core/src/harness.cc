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

#include "sisa/harness.h"

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <system_error>

#include "sisa/errors.h"
#include "sisa/metrics.h"
#include "sisa/run.h"
#include "sisa/sharding.h"
#include "parallel.h"

namespace sisa {
namespace {

namespace fs = std::filesystem;

std::string Slug(Method method) {
  return method == Method::kSisa ? "sisa" : "sisa-pp";
}

std::string Fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

std::string Pad(std::string s, size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string PadLeft(std::string s, size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

// Picks `count` users of `plan`, each hosted by a different shard, in a
// seeded order.
std::vector<std::string> PickUsers(const ShardPlan& plan, int count, uint64_t seed) {
  std::vector<std::string> users;
  for (const PlanEntry& e : plan.entries()) users.push_back(e.user_id);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  RngStream rng({seed, kNoIndex, kNoIndex, "pick-users"});
  rng.Shuffle(std::span<std::string>(users));

  std::vector<std::string> picked;
  std::set<int> used_shards;
  for (const std::string& user : users) {
    if (static_cast<int>(picked.size()) == count) break;
    std::set<int> shards;
    for (PointId id : plan.PointsOfUser(user)) shards.insert(plan.CellOf(id).shard);
    bool clash = false;
    for (int s : shards) clash = clash || used_shards.contains(s);
    if (clash) continue;
    picked.push_back(user);
    used_shards.insert(shards.begin(), shards.end());
  }
  Require(static_cast<int>(picked.size()) == count,
          "grid: cannot find " + std::to_string(count) + " users on distinct shards");
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::string Condition(const EvalReport& r) {
  if (r.phase == "before") return "before unlearning (single model)";
  return std::to_string(r.users_removed) + (r.users_removed == 1 ? " user" : " users") +
         " removed (" + std::to_string(r.shards) + "-shard)";
}

}  // namespace

std::string ToString(Method method) {
  return method == Method::kSisa ? "SISA" : "SISA++";
}

GridConfig GridConfig::FromKeyValue(const KeyValueFile& kv) {
  GridConfig grid;
  grid.train = TrainConfig::FromKeyValue(kv);
  auto ints = [&](const char* key, std::vector<int>& out) {
    if (!kv.Has(key)) return;
    out.clear();
    for (int64_t v : kv.GetIntList(key)) out.push_back(static_cast<int>(v));
  };
  ints("shards", grid.shard_counts);
  ints("users_removed", grid.users_removed);
  if (kv.Has("slices")) grid.num_slices = static_cast<int>(kv.GetInt("slices"));
  if (kv.Has("mode")) grid.user_aware = ParseShardMode(kv.Get("mode")) == ShardMode::kUserAware;
  if (kv.Has("test_fraction")) grid.test_fraction = kv.GetDouble("test_fraction");
  if (kv.Has("split_seed")) grid.split_seed = kv.GetUint("split_seed");
  if (kv.Has("plan_seed")) grid.plan_seed = kv.GetUint("plan_seed");
  if (kv.Has("grid_workers")) grid.workers = static_cast<int>(kv.GetInt("grid_workers"));
  Require(!grid.shard_counts.empty() && !grid.users_removed.empty(), "grid: empty axis");
  for (int k : grid.shard_counts) Require(k >= 1, "grid: shard counts must be >= 1");
  for (int u : grid.users_removed) Require(u >= 1, "grid: users_removed must be >= 1");
  Require(grid.num_slices >= 1, "grid: slices must be >= 1");
  Require(grid.workers >= 1, "grid: grid_workers must be >= 1");
  return grid;
}

KeyValueFile GridConfig::ToKeyValue() const {
  KeyValueFile kv = train.ToKeyValue();
  kv.SetIntList("shards", std::vector<int64_t>(shard_counts.begin(), shard_counts.end()));
  kv.SetIntList("users_removed",
                std::vector<int64_t>(users_removed.begin(), users_removed.end()));
  kv.SetInt("slices", num_slices);
  kv.Set("mode", user_aware ? "user_aware" : "random");
  kv.SetDouble("test_fraction", test_fraction);
  kv.SetUint("split_seed", split_seed);
  kv.SetUint("plan_seed", plan_seed);
  kv.SetInt("grid_workers", workers);
  return kv;
}

std::string EvalReport::Label() const {
  std::string label = Slug(method);
  if (phase == "before") return label + "-before";
  return label + "-k" + std::to_string(shards) + "-u" + std::to_string(users_removed);
}

KeyValueFile EvalReport::ToKeyValue() const {
  const bool cls = task.is_classification();
  const char* first = cls ? "accuracy" : "mae";
  const char* second = cls ? "macro_f1" : "rmse";
  KeyValueFile kv;
  kv.Set("format", "sisa-eval-report/1");
  kv.Set("method", ToString(method));
  kv.SetInt("shards", shards);
  kv.SetInt("users_removed", users_removed);
  kv.Set("phase", phase);
  kv.Set("task", cls ? "cls" : "reg");
  kv.Set("status", ok ? "ok" : "failed");
  if (!ok) {
    kv.Set("error", error);
    return kv;
  }
  if (phase == "before") {
    kv.SetDouble(first, before.first);
    kv.SetDouble(second, before.second);
  } else {
    kv.SetDouble(std::string("before.") + first, before.first);
    kv.SetDouble(std::string("before.") + second, before.second);
    kv.SetDouble(first, after.first);
    kv.SetDouble(second, after.second);
    kv.SetDouble(std::string("delta.") + first, after.first - before.first);
    kv.SetDouble(std::string("delta.") + second, after.second - before.second);
    kv.Set("removed_users", JoinStrings(removed_users, ','));
    ledger.WriteTo(kv);
  }
  kv.SetUint("forward_passes_per_query", forward_passes_per_query);
  kv.SetUint("seed.plan", plan_seed);
  kv.SetUint("seed.split", split_seed);
  kv.SetUint("seed.master", master_seed);
  return kv;
}

Scores Evaluate(const EnsembleModel& ensemble, const Dataset& test,
                uint64_t* forward_passes_per_query) {
  Require(!test.empty(), "evaluate: empty test set");
  const Task& task = test.task();
  const uint64_t passes_before = ThreadForwardPassCount();
  Scores scores;
  if (task.is_classification()) {
    std::vector<int> preds, truth;
    for (const DataPoint& p : test.points()) {
      preds.push_back(static_cast<int>(ensemble.Predict(p.features)));
      truth.push_back(p.label());
    }
    scores.first = Accuracy(preds, truth);
    scores.second = MacroF1(preds, truth, task.num_classes);
  } else {
    std::vector<double> preds, truth;
    for (const DataPoint& p : test.points()) {
      preds.push_back(ensemble.Predict(p.features));
      truth.push_back(p.target);
    }
    scores.first = MeanAbsoluteError(preds, truth);
    scores.second = RootMeanSquaredError(preds, truth);
  }
  if (forward_passes_per_query != nullptr) {
    *forward_passes_per_query = (ThreadForwardPassCount() - passes_before) / test.size();
  }
  return scores;
}

std::vector<EvalReport> RunGrid(const Dataset& data, const GridConfig& grid,
                                const fs::path& out_dir) {
  const auto [train, test] = SplitTrainTest(data, grid.test_fraction, grid.split_seed);
  const fs::path runs = out_dir / "runs";
  const fs::path cells = out_dir / "cells";
  std::error_code ec;
  fs::remove_all(runs, ec);
  fs::remove_all(cells, ec);
  fs::create_directories(runs);
  fs::create_directories(cells);

  const EnsembleMode sisa_mode = DefaultEnsembleMode(data.task());
  auto base_report = [&](Method method, int shards, int users, const char* phase) {
    EvalReport r;
    r.method = method;
    r.shards = shards;
    r.users_removed = users;
    r.phase = phase;
    r.task = data.task();
    r.plan_seed = grid.plan_seed;
    r.split_seed = grid.split_seed;
    r.master_seed = grid.train.master_seed;
    return r;
  };

  std::vector<EvalReport> reports;

  // Unsharded baseline; with a single member vote/mean and merge coincide.
  {
    EvalReport sisa = base_report(Method::kSisa, 1, 0, "before");
    EvalReport merged = base_report(Method::kSisaPlusPlus, 1, 0, "before");
    try {
      const ShardPlan plan = MakeShardPlan(train, 1, grid.num_slices, grid.plan_seed, grid.user_aware);
      const Run run = Run::Train(runs / "k1", train, plan, grid.train);
      sisa.before = Evaluate(EnsembleOfRun(run, sisa_mode), test, &sisa.forward_passes_per_query);
      merged.before = Evaluate(EnsembleOfRun(run, EnsembleMode::kWeightAverage), test,
                               &merged.forward_passes_per_query);
    } catch (const std::exception& e) {
      sisa.ok = merged.ok = false;
      sisa.error = merged.error = e.what();
    }
    reports.push_back(sisa);
    reports.push_back(merged);
  }

  struct Job {
    int shards;
    int users;
  };
  std::vector<Job> jobs;
  for (int k : grid.shard_counts) {
    for (int u : grid.users_removed) jobs.push_back({k, u});
  }
  std::vector<std::pair<EvalReport, EvalReport>> results(jobs.size());
  internal::ParallelFor(jobs.size(), grid.workers, [&](size_t i) {
    const Job job = jobs[i];
    EvalReport sisa = base_report(Method::kSisa, job.shards, job.users, "after");
    EvalReport merged = base_report(Method::kSisaPlusPlus, job.shards, job.users, "after");
    try {
      const ShardPlan plan =
          MakeShardPlan(train, job.shards, grid.num_slices, grid.plan_seed, grid.user_aware);
      Run run = Run::Train(runs / ("k" + std::to_string(job.shards) + "-u" +
                                   std::to_string(job.users)),
                           train, plan, grid.train);
      sisa.before = Evaluate(EnsembleOfRun(run, sisa_mode), test);
      merged.before = Evaluate(EnsembleOfRun(run, EnsembleMode::kWeightAverage), test);

      const std::vector<std::string> users = PickUsers(plan, job.users, grid.plan_seed);
      const UnlearnOutcome outcome =
          ExecuteUnlearn(run, UnlearnRequest::ForUsers({users.begin(), users.end()}));
      sisa.after = Evaluate(EnsembleOfRun(run, sisa_mode), test, &sisa.forward_passes_per_query);
      merged.after = Evaluate(EnsembleOfRun(run, EnsembleMode::kWeightAverage), test,
                              &merged.forward_passes_per_query);
      sisa.removed_users = merged.removed_users = users;
      sisa.ledger = merged.ledger = outcome.ledger;
    } catch (const std::exception& e) {
      sisa.ok = merged.ok = false;
      sisa.error = merged.error = e.what();
    }
    results[i] = {sisa, merged};
  });

  // SISA rows first, then SISA++.
  for (const auto& [sisa, merged] : results) reports.push_back(sisa);
  for (const auto& [sisa, merged] : results) reports.push_back(merged);
  std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
    return a.method < b.method;
  });

  for (const EvalReport& r : reports) r.ToKeyValue().Save(cells / (r.Label() + ".txt"));
  WriteFileAtomic(out_dir / "table.txt", FormatComparisonTable(reports));
  return reports;
}

std::string FormatComparisonTable(const std::vector<EvalReport>& reports) {
  if (reports.empty()) return "";
  const bool cls = reports.front().task.is_classification();
  // Classification scores are shown as percentages.
  const double scale = cls ? 100.0 : 1.0;
  const std::string m1 = cls ? "A(%)" : "MAE";
  const std::string m2 = cls ? "F1(%)" : "RMSE";

  std::string out;
  out += "# before/after unlearning: " + std::string(cls ? "accuracy and macro-F1" : "MAE and RMSE") +
         " on the held-out split\n";
  out += "# pre-* columns: the same sharded ensemble before the unlearning request\n";
  out += Pad("method", 8) + Pad("condition", 34) + PadLeft(m1, 9) + PadLeft(m2, 9) +
         PadLeft("pre-" + m1, 10) + PadLeft("pre-" + m2, 10) + PadLeft("delta-" + m1, 12) +
         PadLeft("delta-" + m2, 12) + PadLeft("steps", 8) + PadLeft("saved", 8) + "\n";
  for (const EvalReport& r : reports) {
    std::string row = Pad(ToString(r.method), 8) + Pad(Condition(r), 34);
    if (!r.ok) {
      out += row + "FAILED: " + r.error + "\n";
      continue;
    }
    if (r.phase == "before") {
      row += PadLeft(Fixed(r.before.first * scale, 2), 9) + PadLeft(Fixed(r.before.second * scale, 2), 9);
      row += PadLeft("-", 10) + PadLeft("-", 10) + PadLeft("-", 12) + PadLeft("-", 12) +
             PadLeft("-", 8) + PadLeft("-", 8);
    } else {
      row += PadLeft(Fixed(r.after.first * scale, 2), 9) + PadLeft(Fixed(r.after.second * scale, 2), 9);
      row += PadLeft(Fixed(r.before.first * scale, 2), 10) +
             PadLeft(Fixed(r.before.second * scale, 2), 10);
      row += PadLeft(Fixed((r.after.first - r.before.first) * scale, 2), 12) +
             PadLeft(Fixed((r.after.second - r.before.second) * scale, 2), 12);
      row += PadLeft(std::to_string(r.ledger.optimizer_steps_executed), 8) +
             PadLeft(Fixed(r.ledger.savings_ratio(), 3), 8);
    }
    out += row + "\n";
  }
  return out;
}

}  // namespace sisa
