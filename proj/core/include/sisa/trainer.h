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

// Slice-incremental training of one constituent model per shard.
//
// Stage s trains on the union of slices 0..s for e_s epochs and then writes
// a checkpoint. e_s = floor(E / R), with the remainder added to the last
// stage. Mini-batch order comes from RngPath::Shuffle(seed, shard, stage);
// the stream is drawn once per epoch and the last short batch is kept.
// Every shard starts from the same RngPath::Init(seed) model unless
// `shared_init` is off.
//
// Because the random streams depend only on structural position, resuming
// at stage s on a retained subset replays precisely what a from-scratch run
// on that subset would do.

#ifndef SISA_TRAINER_H_
#define SISA_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sisa/adam.h"
#include "sisa/checkpoint.h"
#include "sisa/kv.h"
#include "sisa/model.h"
#include "sisa/sharding.h"

namespace sisa {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  AdamHyperparams adam;
  std::vector<int> hidden_dims = {128};
  Activation activation = Activation::kRelu;
  uint64_t master_seed = 0;
  bool shared_init = true;
  // Shards trained concurrently; results do not depend on it.
  int workers = 1;
  // Resolved network shape. Filled from the data by WithArchFor; not part of
  // the config file.
  ArchDescriptor arch;

  // Throws InvalidArgumentError on non-positive epochs/batch size/lr.
  void Validate() const;

  ArchDescriptor ArchFor(int input_dim, const Task& task) const;
  TrainConfig WithArchFor(int input_dim, const Task& task) const;

  KeyValueFile ToKeyValue() const;
  // Missing keys keep their defaults.
  static TrainConfig FromKeyValue(const KeyValueFile& kv);
};

int EpochsForStage(int total_epochs, int num_slices, int stage);

// ceil(n / batch_size) * epochs.
uint64_t StageSteps(size_t num_points, int batch_size, int epochs);

// Optimizer steps a full run of stages from_stage..R-1 would take on these
// slices (vacuous stages cost nothing).
uint64_t ScheduledSteps(const SliceLists& slices, const TrainConfig& cfg,
                        int from_stage = 0);

// Ids of slices 0..stage concatenated in slice order.
std::vector<PointId> StagePoints(const SliceLists& slices, int stage);
uint64_t StageDigest(std::span<const PointId> points);

struct ShardTrainResult {
  ModelParams model;
  uint64_t steps = 0;
  int stages_executed = 0;
};

// Trains stages 0..R-1 of one shard and writes a checkpoint after each.
// R is slices.size(). Throws InvalidArgumentError when every slice is empty.
ShardTrainResult TrainShard(const SliceLists& slices, const TrainConfig& cfg,
                            int shard_index, const CheckpointStore& store);

// Re-executes stages from_stage..R-1 on `retained` starting from `prior`'s
// checkpoint at from_stage - 1 (fresh init when from_stage is 0). Stages
// before from_stage are copied unchanged into `next`. When from_stage is R
// the stored final model is returned and nothing is retrained.
//
// Throws NotFoundError when the needed checkpoint is missing and
// IntegrityError when its digest does not match the retained prefix; both
// messages report the earliest stage still available.
ShardTrainResult ResumeShard(const CheckpointStore& prior,
                             const CheckpointStore& next, int shard_index,
                             int from_stage, const SliceLists& retained,
                             const TrainConfig& cfg);

}  // namespace sisa

#endif  // SISA_TRAINER_H_
