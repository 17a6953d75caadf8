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

#include "sisa/trainer.h"

#include <algorithm>
#include <numeric>
#include <span>
#include <string>

#include "sisa/errors.h"
#include "sisa/serialize.h"

namespace sisa {
namespace {

struct StageInput {
  std::vector<const DataPoint*> points;
  std::vector<PointId> ids;
};

StageInput GatherStage(const SliceLists& slices, int stage) {
  StageInput input;
  for (int s = 0; s <= stage; ++s) {
    for (const DataPoint& p : slices[s]) {
      input.points.push_back(&p);
      input.ids.push_back(p.point_id);
    }
  }
  return input;
}

RngPath InitPath(const TrainConfig& cfg, int shard) {
  RngPath path = RngPath::Init(cfg.master_seed);
  if (!cfg.shared_init) path.shard = shard;
  return path;
}

struct TrainState {
  ModelParams model;
  OptimizerState optimizer;
};

TrainState FreshState(const TrainConfig& cfg, int shard) {
  TrainState state;
  state.model = InitModel(cfg.arch, InitPath(cfg, shard));
  state.optimizer = OptimizerState::Fresh(state.model.params.size(), cfg.adam);
  return state;
}

// Executes stages [from_stage, R) starting from `state` and writes a
// checkpoint after each.
ShardTrainResult RunStages(const SliceLists& slices, const TrainConfig& cfg,
                           int shard, int from_stage, TrainState state,
                           const CheckpointStore& store) {
  const int num_stages = static_cast<int>(slices.size());
  const size_t batch_size = static_cast<size_t>(cfg.batch_size);
  ShardTrainResult result;
  std::vector<const DataPoint*> batch;
  batch.reserve(batch_size);

  for (int stage = from_stage; stage < num_stages; ++stage) {
    const StageInput input = GatherStage(slices, stage);
    Checkpoint ckpt;
    ckpt.shard = shard;
    ckpt.stage = stage;
    ckpt.epochs = EpochsForStage(cfg.epochs, num_stages, stage);
    ckpt.rng_path = RngPath::Shuffle(cfg.master_seed, shard, stage);
    ckpt.points = input.ids;
    ckpt.data_digest = StageDigest(input.ids);
    ckpt.vacuous = slices[stage].empty();

    RngStream rng(ckpt.rng_path);
    if (!ckpt.vacuous) {
      std::vector<size_t> order(input.points.size());
      for (int epoch = 0; epoch < ckpt.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), size_t{0});
        rng.Shuffle(std::span<size_t>(order));
        for (size_t start = 0; start < order.size(); start += batch_size) {
          const size_t end = std::min(order.size(), start + batch_size);
          batch.clear();
          for (size_t i = start; i < end; ++i) batch.push_back(input.points[order[i]]);
          const LossAndGrad lg = ComputeLossAndGrad(state.model, batch);
          AdamStepInPlace(state.model, state.optimizer, lg.grad);
          ++ckpt.steps;
        }
      }
      ++result.stages_executed;
    }
    ckpt.rng_draws = rng.draws();
    ckpt.model = state.model;
    ckpt.optimizer = state.optimizer;
    store.Write(ckpt);
    result.steps += ckpt.steps;
  }
  result.model = std::move(state.model);
  return result;
}

std::string AvailableStages(const CheckpointStore& store, int shard) {
  const std::optional<int> last = store.LastContiguousStage(shard);
  if (!last) return "no stage is available";
  return "stages 0.." + std::to_string(*last) +
         " are available; the earliest resumable stage is " +
         std::to_string(*last + 1);
}

}  // namespace

void TrainConfig::Validate() const {
  Require(epochs >= 1, "config: epochs must be >= 1");
  Require(batch_size >= 1, "config: batch_size must be >= 1");
  Require(adam.lr > 0.0, "config: lr must be positive");
  Require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, "config: beta1 must be in [0, 1)");
  Require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, "config: beta2 must be in [0, 1)");
  Require(adam.epsilon > 0.0, "config: epsilon must be positive");
  Require(workers >= 1, "config: workers must be >= 1");
}

ArchDescriptor TrainConfig::ArchFor(int input_dim, const Task& task) const {
  return ArchDescriptor::For(input_dim, hidden_dims, task, activation);
}

TrainConfig TrainConfig::WithArchFor(int input_dim, const Task& task) const {
  TrainConfig cfg = *this;
  cfg.arch = ArchFor(input_dim, task);
  return cfg;
}

KeyValueFile TrainConfig::ToKeyValue() const {
  KeyValueFile kv;
  kv.SetInt("epochs", epochs);
  kv.SetInt("batch_size", batch_size);
  kv.SetDouble("lr", adam.lr);
  kv.SetDouble("beta1", adam.beta1);
  kv.SetDouble("beta2", adam.beta2);
  kv.SetDouble("epsilon", adam.epsilon);
  kv.SetIntList("hidden_dims", std::vector<int64_t>(hidden_dims.begin(), hidden_dims.end()));
  kv.Set("activation", sisa::ToString(activation));
  kv.SetUint("master_seed", master_seed);
  kv.SetInt("shared_init", shared_init ? 1 : 0);
  kv.SetInt("workers", workers);
  return kv;
}

TrainConfig TrainConfig::FromKeyValue(const KeyValueFile& kv) {
  TrainConfig cfg;
  if (kv.Has("epochs")) cfg.epochs = static_cast<int>(kv.GetInt("epochs"));
  if (kv.Has("batch_size")) cfg.batch_size = static_cast<int>(kv.GetInt("batch_size"));
  if (kv.Has("lr")) cfg.adam.lr = kv.GetDouble("lr");
  if (kv.Has("beta1")) cfg.adam.beta1 = kv.GetDouble("beta1");
  if (kv.Has("beta2")) cfg.adam.beta2 = kv.GetDouble("beta2");
  if (kv.Has("epsilon")) cfg.adam.epsilon = kv.GetDouble("epsilon");
  if (kv.Has("hidden_dims")) {
    cfg.hidden_dims.clear();
    for (int64_t h : kv.GetIntList("hidden_dims")) cfg.hidden_dims.push_back(static_cast<int>(h));
  }
  if (kv.Has("activation")) cfg.activation = ParseActivation(kv.Get("activation"));
  if (kv.Has("master_seed")) cfg.master_seed = kv.GetUint("master_seed");
  if (kv.Has("shared_init")) cfg.shared_init = kv.GetInt("shared_init") != 0;
  if (kv.Has("workers")) cfg.workers = static_cast<int>(kv.GetInt("workers"));
  cfg.Validate();
  return cfg;
}

int EpochsForStage(int total_epochs, int num_slices, int stage) {
  Require(num_slices >= 1 && stage >= 0 && stage < num_slices,
          "stage index out of range");
  const int base = total_epochs / num_slices;
  return stage == num_slices - 1 ? base + total_epochs % num_slices : base;
}

uint64_t StageSteps(size_t num_points, int batch_size, int epochs) {
  const uint64_t b = static_cast<uint64_t>(batch_size);
  return (num_points + b - 1) / b * static_cast<uint64_t>(epochs);
}

uint64_t ScheduledSteps(const SliceLists& slices, const TrainConfig& cfg,
                        int from_stage) {
  const int num_stages = static_cast<int>(slices.size());
  uint64_t steps = 0;
  size_t union_size = 0;
  for (int s = 0; s < num_stages; ++s) {
    union_size += slices[s].size();
    if (s < from_stage || slices[s].empty()) continue;
    steps += StageSteps(union_size, cfg.batch_size,
                        EpochsForStage(cfg.epochs, num_stages, s));
  }
  return steps;
}

std::vector<PointId> StagePoints(const SliceLists& slices, int stage) {
  return GatherStage(slices, stage).ids;
}

uint64_t StageDigest(std::span<const PointId> points) {
  uint64_t h = Mix64(0x6469676573740aULL ^ points.size());
  for (PointId id : points) h = Mix64(h ^ Mix64(id + 0x9e3779b97f4a7c15ULL));
  return h;
}

ShardTrainResult TrainShard(const SliceLists& slices, const TrainConfig& cfg,
                            int shard_index, const CheckpointStore& store) {
  cfg.Validate();
  cfg.arch.Validate();
  Require(!slices.empty(), "train_shard: no slices");
  const bool any = std::any_of(slices.begin(), slices.end(),
                               [](const auto& s) { return !s.empty(); });
  Require(any, "train_shard: shard " + std::to_string(shard_index) + " has no points");
  return RunStages(slices, cfg, shard_index, 0, FreshState(cfg, shard_index), store);
}

ShardTrainResult ResumeShard(const CheckpointStore& prior,
                             const CheckpointStore& next, int shard_index,
                             int from_stage, const SliceLists& retained,
                             const TrainConfig& cfg) {
  cfg.Validate();
  cfg.arch.Validate();
  const int num_stages = static_cast<int>(retained.size());
  Require(num_stages >= 1, "resume_shard: no slices");
  Require(from_stage >= 0 && from_stage <= num_stages,
          "resume_shard: from_stage out of range");
  const bool separate = prior.root() != next.root();

  TrainState state;
  if (from_stage > 0) {
    Checkpoint ckpt;
    try {
      ckpt = prior.Read(shard_index, from_stage - 1);
    } catch (const NotFoundError& e) {
      throw NotFoundError(std::string(e.what()) + "; " + AvailableStages(prior, shard_index));
    } catch (const IoError& e) {
      throw IntegrityError("corrupt checkpoint for shard " + std::to_string(shard_index) +
                           " stage " + std::to_string(from_stage - 1) + ": " + e.what() +
                           "; " + AvailableStages(prior, shard_index));
    }
    const uint64_t expected = StageDigest(StagePoints(retained, from_stage - 1));
    if (ckpt.data_digest != expected) {
      throw IntegrityError("shard " + std::to_string(shard_index) + " stage " +
                           std::to_string(from_stage - 1) +
                           ": checkpoint digest does not match the retained data");
    }
    if (ckpt.model.arch != cfg.arch) {
      throw IntegrityError("shard " + std::to_string(shard_index) +
                           ": checkpoint architecture differs from the config");
    }
    state.model = std::move(ckpt.model);
    state.optimizer = std::move(ckpt.optimizer);
  } else {
    state = FreshState(cfg, shard_index);
  }

  if (separate) {
    for (int s = 0; s < from_stage; ++s) next.CopyFrom(prior, shard_index, s);
  }
  if (from_stage == num_stages) {
    ShardTrainResult result;
    result.model = std::move(state.model);
    return result;
  }
  const bool any = std::any_of(retained.begin(), retained.end(),
                               [](const auto& s) { return !s.empty(); });
  Require(any, "resume_shard: shard " + std::to_string(shard_index) + " has no retained points");
  return RunStages(retained, cfg, shard_index, from_stage, std::move(state), next);
}

}  // namespace sisa
