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

#include "sisa/checkpoint.h"

#include <cstdio>
#include <system_error>

#include "sisa/errors.h"
#include "sisa/kv.h"
#include "sisa/serialize.h"

namespace sisa {
namespace {

namespace fs = std::filesystem;

std::string Padded(int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace

CheckpointStore::CheckpointStore(fs::path root) : root_(std::move(root)) {}

fs::path CheckpointStore::StageDir(int shard, int stage) const {
  return root_ / ("shard-" + Padded(shard, 3)) / ("stage-" + Padded(stage, 2));
}

bool CheckpointStore::Exists(int shard, int stage) const {
  return fs::exists(StageDir(shard, stage) / "manifest.txt");
}

void CheckpointStore::Write(const Checkpoint& ckpt) const {
  const fs::path dir = StageDir(ckpt.shard, ckpt.stage);
  if (fs::exists(dir)) {
    throw IntegrityError("checkpoint " + dir.string() + " already exists");
  }
  fs::path tmp = dir;
  tmp += ".partial";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp, ec);
  if (ec) throw IoError("cannot create " + tmp.string() + ": " + ec.message());

  KeyValueFile kv;
  kv.Set("format", "sisa-checkpoint/1");
  kv.SetInt("shard", ckpt.shard);
  kv.SetInt("stage", ckpt.stage);
  kv.SetInt("vacuous", ckpt.vacuous ? 1 : 0);
  kv.SetInt("epochs", ckpt.epochs);
  kv.SetUint("steps", ckpt.steps);
  kv.Set("rng_path", ckpt.rng_path.ToString());
  kv.SetUint("rng_draws", ckpt.rng_draws);
  kv.SetUint("digest", ckpt.data_digest);
  kv.SetUint("num_points", ckpt.points.size());
  kv.SetUintList("points", ckpt.points);
  WriteArch(ckpt.model.arch, kv);
  WriteOptimizerHeader(ckpt.optimizer, kv);
  kv.Set("params_blob", "params.bin");
  kv.Set("optim_blob", "optim.bin");

  WriteFileAtomic(tmp / "params.bin", EncodeDoubles(ckpt.model.params));
  WriteFileAtomic(tmp / "optim.bin", EncodeOptimizerMoments(ckpt.optimizer));
  kv.Save(tmp / "manifest.txt");

  fs::create_directories(dir.parent_path(), ec);
  fs::rename(tmp, dir, ec);
  if (ec) throw IoError("cannot publish " + dir.string() + ": " + ec.message());
}

Checkpoint CheckpointStore::Read(int shard, int stage) const {
  const fs::path dir = StageDir(shard, stage);
  if (!Exists(shard, stage)) {
    throw NotFoundError("no checkpoint for shard " + std::to_string(shard) +
                        " stage " + std::to_string(stage) + " under " +
                        root_.string());
  }
  const KeyValueFile kv = KeyValueFile::Load(dir / "manifest.txt");
  Checkpoint ckpt;
  ckpt.shard = static_cast<int>(kv.GetInt("shard"));
  ckpt.stage = static_cast<int>(kv.GetInt("stage"));
  if (ckpt.shard != shard || ckpt.stage != stage) {
    throw IntegrityError("checkpoint manifest at " + dir.string() +
                         " names a different key");
  }
  ckpt.vacuous = kv.GetInt("vacuous") != 0;
  ckpt.epochs = static_cast<int>(kv.GetInt("epochs"));
  ckpt.steps = kv.GetUint("steps");
  ckpt.rng_path = RngPath::FromString(kv.Get("rng_path"));
  ckpt.rng_draws = kv.GetUint("rng_draws");
  ckpt.data_digest = kv.GetUint("digest");
  ckpt.points = kv.GetUintList("points");
  if (ckpt.points.size() != kv.GetUint("num_points")) {
    throw IntegrityError("checkpoint point list is truncated: " + dir.string());
  }
  ckpt.model.arch = ReadArch(kv);
  const size_t n = ParamCount(ckpt.model.arch);
  ckpt.model.params = DecodeDoubles(ReadFile(dir / kv.Get("params_blob")), n);
  ckpt.optimizer = ReadOptimizer(kv, ReadFile(dir / kv.Get("optim_blob")), n);
  return ckpt;
}

ModelParams CheckpointStore::ReadModel(int shard, int stage) const {
  const fs::path dir = StageDir(shard, stage);
  if (!Exists(shard, stage)) {
    throw NotFoundError("no checkpoint for shard " + std::to_string(shard) +
                        " stage " + std::to_string(stage) + " under " +
                        root_.string());
  }
  const KeyValueFile kv = KeyValueFile::Load(dir / "manifest.txt");
  ModelParams model;
  model.arch = ReadArch(kv);
  model.params = DecodeDoubles(ReadFile(dir / kv.Get("params_blob")),
                               ParamCount(model.arch));
  return model;
}

void CheckpointStore::CopyFrom(const CheckpointStore& source, int shard,
                               int stage) const {
  const fs::path from = source.StageDir(shard, stage);
  const fs::path to = StageDir(shard, stage);
  if (!source.Exists(shard, stage)) {
    throw NotFoundError("cannot copy missing checkpoint " + from.string());
  }
  if (fs::exists(to)) {
    throw IntegrityError("checkpoint " + to.string() + " already exists");
  }
  fs::path tmp = to;
  tmp += ".partial";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp.parent_path(), ec);
  fs::copy(from, tmp, fs::copy_options::recursive, ec);
  if (ec) throw IoError("copy failed: " + from.string() + ": " + ec.message());
  fs::rename(tmp, to, ec);
  if (ec) throw IoError("cannot publish " + to.string() + ": " + ec.message());
}

std::optional<int> CheckpointStore::LastContiguousStage(int shard) const {
  std::optional<int> last;
  for (int s = 0; Exists(shard, s); ++s) last = s;
  return last;
}

}  // namespace sisa
