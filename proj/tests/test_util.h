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

// Shared fixtures for the test binaries.

#ifndef SISA_TESTS_TEST_UTIL_H_
#define SISA_TESTS_TEST_UTIL_H_

#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <system_error>
#include <vector>

#include "sisa/checkpoint.h"
#include "sisa/dataset.h"
#include "sisa/run.h"
#include "sisa/rng.h"
#include "sisa/serialize.h"
#include "sisa/trainer.h"

namespace sisa::testing {

// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string pattern =
        (std::filesystem::temp_directory_path() / "sisa-test-XXXXXX").string();
    if (mkdtemp(pattern.data()) == nullptr) std::abort();
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Classification points with `users` users owning contiguous blocks and
// labels i mod C around well-separated centers.
inline Dataset BlobDataset(int n, int users, int d, int num_classes, uint64_t seed,
                           double separation = 3.0) {
  RngStream rng({seed, kNoIndex, kNoIndex, "test-data"});
  std::vector<DataPoint> points;
  for (int i = 0; i < n; ++i) {
    DataPoint p;
    p.point_id = static_cast<PointId>(i);
    p.user_id = "user" + std::to_string(static_cast<int64_t>(i) * users / n);
    const int label = i % num_classes;
    p.features.resize(d);
    for (int f = 0; f < d; ++f) {
      p.features[f] = rng.NextNormal() + (f % num_classes == label ? separation : 0.0);
    }
    p.target = label;
    points.push_back(std::move(p));
  }
  return Dataset(std::move(points), d, Task::Classification(num_classes));
}

inline Dataset LinearDataset(int n, int users, int d, uint64_t seed) {
  RngStream rng({seed, kNoIndex, kNoIndex, "test-linear"});
  std::vector<double> w(d);
  for (double& x : w) x = rng.NextNormal();
  std::vector<DataPoint> points;
  for (int i = 0; i < n; ++i) {
    DataPoint p;
    p.point_id = static_cast<PointId>(1000 + i);
    p.user_id = "r" + std::to_string(static_cast<int64_t>(i) * users / n);
    p.features.resize(d);
    double y = 0.0;
    for (int f = 0; f < d; ++f) {
      p.features[f] = rng.NextNormal();
      y += w[f] * p.features[f];
    }
    p.target = y + 0.05 * rng.NextNormal();
    points.push_back(std::move(p));
  }
  return Dataset(std::move(points), d, Task::Regression());
}

// Small, fast training config for tests that do not care about accuracy.
inline TrainConfig SmallConfig(uint64_t seed, int epochs = 4) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 8;
  cfg.hidden_dims = {6};
  cfg.master_seed = seed;
  return cfg;
}

inline bool BitwiseEqual(const ModelParams& a, const ModelParams& b) {
  return a.arch == b.arch && EncodeDoubles(a.params) == EncodeDoubles(b.params);
}

// From-scratch models of every shard that keeps at least one point after
// `removed` is erased, trained on slices rebuilt from the plan table.
inline std::map<int, ModelParams> ScratchModels(const Run& run,
                                                const std::set<PointId>& removed) {
  const ShardPlan& plan = run.plan();
  std::vector<SliceLists> slices(plan.num_shards(), SliceLists(plan.num_slices()));
  for (size_t i = 0; i < plan.entries().size(); ++i) {
    const PlanEntry& e = plan.entries()[i];
    if (removed.contains(e.point_id)) continue;
    slices[e.cell.shard][e.cell.slice].push_back(
        run.dataset().points()[run.dataset().IndexOf(e.point_id)]);
  }
  TempDir scratch;
  const CheckpointStore store(scratch.path());
  std::map<int, ModelParams> out;
  for (int k = 0; k < plan.num_shards(); ++k) {
    bool any = false;
    for (const auto& slice : slices[k]) any = any || !slice.empty();
    if (any) out.emplace(k, TrainShard(slices[k], run.config(), k, store).model);
  }
  return out;
}

// Every regular file under `root`, keyed by relative path.
inline std::map<std::string, std::string> SnapshotTree(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      files[std::filesystem::relative(entry.path(), root).string()] = ReadFile(entry.path());
    }
  }
  return files;
}

}  // namespace sisa::testing

#endif  // SISA_TESTS_TEST_UTIL_H_
