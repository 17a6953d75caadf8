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

// Per-(shard, stage) training snapshots.
//
// Layout under a store root (one root per run generation):
//
//   shard-000/stage-00/manifest.txt   stage, digest, counters, RNG path,
//                                     trained point ids, architecture
//   shard-000/stage-00/params.bin     ModelParams blob
//   shard-000/stage-00/optim.bin      first then second Adam moment
//
// Each key is write-once. A stage directory is assembled under a temporary
// name and renamed into place, so a crash leaves either the full stage or
// nothing.

#ifndef SISA_CHECKPOINT_H_
#define SISA_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "sisa/adam.h"
#include "sisa/dataset.h"
#include "sisa/model.h"
#include "sisa/rng.h"

namespace sisa {

struct Checkpoint {
  int shard = 0;
  // Model state after training through slices 0..stage.
  int stage = 0;
  // The stage's own slice was empty, so training was skipped and the state
  // is a copy of the previous stage.
  bool vacuous = false;
  ModelParams model;
  OptimizerState optimizer;
  RngPath rng_path;
  uint64_t rng_draws = 0;
  // Ids of the points the stage trained on (union of slices 0..stage, in
  // training order before shuffling).
  std::vector<PointId> points;
  uint64_t data_digest = 0;
  int epochs = 0;
  // Optimizer steps taken in this stage alone.
  uint64_t steps = 0;
};

class CheckpointStore {
 public:
  explicit CheckpointStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path StageDir(int shard, int stage) const;
  bool Exists(int shard, int stage) const;

  // Throws IntegrityError if the key already exists, IoError on a failed
  // write.
  void Write(const Checkpoint& checkpoint) const;

  // Throws NotFoundError if missing, IntegrityError/IoError if corrupt.
  Checkpoint Read(int shard, int stage) const;
  // Final-model shortcut; avoids decoding optimizer moments.
  ModelParams ReadModel(int shard, int stage) const;

  // Copies a stage verbatim from another store (same key).
  void CopyFrom(const CheckpointStore& source, int shard, int stage) const;

  // Highest stage s such that stages 0..s all exist, if any.
  std::optional<int> LastContiguousStage(int shard) const;

 private:
  std::filesystem::path root_;
};

}  // namespace sisa

#endif  // SISA_CHECKPOINT_H_
