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

// A trained run on disk.
//
//   <run>/run.txt            current generation pointer
//   <run>/data.csv           training feature file (never rewritten)
//   <run>/plan.txt           shard plan (never recomputed)
//   <run>/config.txt         TrainConfig
//   <run>/gen-0000/          generation 0: initial training
//     generation.txt         parent, request, cumulative removals, live
//                            shards, affected cells
//     shard-000/stage-00/    checkpoints (see checkpoint.h)
//     merged/                cached weight-averaged model
//   <run>/gen-0001/ ...      one generation per unlearning transaction
//
// Generations are immutable once written; unlearning only ever adds a new
// one.

#ifndef SISA_RUN_H_
#define SISA_RUN_H_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sisa/checkpoint.h"
#include "sisa/dataset.h"
#include "sisa/model.h"
#include "sisa/sharding.h"
#include "sisa/trainer.h"

namespace sisa {

struct GenerationInfo {
  int id = 0;
  std::optional<int> parent;
  // Request that produced this generation (none for generation 0).
  std::optional<UnlearnRequest> request;
  // All points erased up to and including this generation.
  std::set<PointId> removed;
  std::vector<int> live_shards;
  // shard -> earliest affected stage, for the producing request.
  std::map<int, int> affected;
  // Shards dropped by this generation because they became empty.
  std::vector<int> dropped_shards;

  KeyValueFile ToKeyValue() const;
  static GenerationInfo FromKeyValue(const KeyValueFile& kv);
};

class Run {
 public:
  // Writes data, plan and config into a fresh directory (which must not
  // exist or be empty), trains every shard into generation 0.
  static Run Train(const std::filesystem::path& dir, const Dataset& dataset,
                   const ShardPlan& plan, const TrainConfig& cfg);
  static Run Open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const Dataset& dataset() const { return dataset_; }
  const ShardPlan& plan() const { return plan_; }
  const TrainConfig& config() const { return config_; }
  int current_generation() const { return current_; }

  std::filesystem::path GenerationDir(int generation) const;
  CheckpointStore Store(int generation) const;
  GenerationInfo LoadGeneration(int generation) const;
  GenerationInfo CurrentGeneration() const {
    return LoadGeneration(current_);
  }

  // Slices of a shard with the generation's removals applied.
  SliceLists RetainedSlices(int shard, const std::set<PointId>& removed) const;

  // Final (last-stage) models of the live shards, in shard order.
  std::vector<std::pair<int, ModelParams>> ShardModels(int generation) const;

  // Registers a fully written generation and advances the pointer.
  void Commit(const GenerationInfo& info);

  // Generation id encoded in a `gen-NNNN` directory name.
  static int ParseGenerationDir(const std::filesystem::path& path);

 private:
  Run() = default;
  void WritePointer() const;

  std::filesystem::path dir_;
  Dataset dataset_;
  ShardPlan plan_;
  TrainConfig config_;
  int current_ = 0;
};

}  // namespace sisa

#endif  // SISA_RUN_H_
