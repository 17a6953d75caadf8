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

// Before/after-unlearning benchmark grid.
//
// For every shard count K and removal size U in the grid, one run is
// trained on the training split and then unlearns U users, each from a
// different shard. Both aggregations are evaluated on that same run: SISA
// (vote or mean) and SISA++ (weight average). A single unsharded model
// (K = 1) provides the "before" baseline; with one member both aggregations
// coincide, so the baseline is shared by both methods.
//
// Output directory:
//   <out>/cells/<method>-before.txt        baseline report per method
//   <out>/cells/<method>-k<K>-u<U>.txt     one report per grid cell
//   <out>/table.txt                        combined comparison table
//   <out>/runs/...                         the trained runs
// Reports contain no timings or paths, so reruns are byte-identical.

#ifndef SISA_HARNESS_H_
#define SISA_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sisa/aggregate.h"
#include "sisa/dataset.h"
#include "sisa/kv.h"
#include "sisa/trainer.h"
#include "sisa/unlearn.h"

namespace sisa {

struct GridConfig {
  std::vector<int> shard_counts = {4, 8};
  std::vector<int> users_removed = {1, 2};
  int num_slices = 2;
  bool user_aware = true;
  double test_fraction = 0.2;
  uint64_t split_seed = 17;
  uint64_t plan_seed = 7;
  TrainConfig train;
  // Grid cells trained concurrently.
  int workers = 1;

  static GridConfig FromKeyValue(const KeyValueFile& kv);
  KeyValueFile ToKeyValue() const;
};

enum class Method { kSisa, kSisaPlusPlus };
std::string ToString(Method method);

struct Scores {
  // Classification: accuracy, macro F1. Regression: MAE, RMSE.
  double first = 0.0;
  double second = 0.0;
};

struct EvalReport {
  Method method = Method::kSisa;
  int shards = 1;
  int users_removed = 0;
  // "before" for the unsharded baseline, "after" for grid cells.
  std::string phase;
  Task task;
  bool ok = true;
  std::string error;
  // The cell's ensemble on the test split before and after unlearning.
  Scores before;
  Scores after;
  std::vector<std::string> removed_users;
  CostLedger ledger;
  uint64_t forward_passes_per_query = 0;
  uint64_t plan_seed = 0;
  uint64_t split_seed = 0;
  uint64_t master_seed = 0;

  std::string Label() const;
  KeyValueFile ToKeyValue() const;
};

// Scores of `ensemble` on `test`, plus the forward passes it spent per query.
Scores Evaluate(const EnsembleModel& ensemble, const Dataset& test,
                uint64_t* forward_passes_per_query = nullptr);

// Runs the grid and writes reports under `out_dir`. Cells that fail are
// recorded with ok = false; the remaining cells still run.
std::vector<EvalReport> RunGrid(const Dataset& data, const GridConfig& grid,
                                const std::filesystem::path& out_dir);

// Plain-text table: one row per method and condition.
std::string FormatComparisonTable(const std::vector<EvalReport>& reports);

}  // namespace sisa

#endif  // SISA_HARNESS_H_
