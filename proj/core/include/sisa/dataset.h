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

#ifndef SISA_DATASET_H_
#define SISA_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sisa {

enum class TaskKind { kClassification, kRegression };

struct Task {
  TaskKind kind = TaskKind::kClassification;
  // Number of classes; 0 for regression.
  int num_classes = 0;

  static Task Classification(int num_classes) {
    return {TaskKind::kClassification, num_classes};
  }
  static Task Regression() { return {TaskKind::kRegression, 0}; }

  bool is_classification() const { return kind == TaskKind::kClassification; }

  friend bool operator==(const Task&, const Task&) = default;
};

using PointId = uint64_t;

struct DataPoint {
  PointId point_id = 0;
  std::string user_id;
  std::vector<double> features;
  // Class index (stored exactly as a double) or a regression target.
  double target = 0.0;

  int label() const { return static_cast<int>(target); }
};

// An ordered collection of points sharing one feature width and task.
class Dataset {
 public:
  Dataset() = default;
  // Validates the invariants: unique ids, rectangular features, targets in
  // range for classification. Throws InvalidArgumentError.
  Dataset(std::vector<DataPoint> points, int feature_dim, Task task);

  const std::vector<DataPoint>& points() const { return points_; }
  int feature_dim() const { return feature_dim_; }
  const Task& task() const { return task_; }
  size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  // Index of a point id in points(); throws NotFoundError.
  size_t IndexOf(PointId id) const;
  bool Contains(PointId id) const;

 private:
  std::vector<DataPoint> points_;
  int feature_dim_ = 0;
  Task task_;
  std::vector<std::pair<PointId, size_t>> sorted_index_;
};

// Comma-separated feature file:
//   #d=<int>,task=<cls|reg>[,C=<int>]
//   point_id,user_id,target,f0,...,f{d-1}
// Doubles are written in shortest round-trip form, so save/load is
// bit-exact and a given dataset always produces the same bytes.
std::string FormatFeatureFile(const Dataset& dataset);
Dataset ParseFeatureFile(std::string_view text);
void SaveFeatureFile(const Dataset& dataset, const std::filesystem::path& path);
Dataset LoadFeatureFile(const std::filesystem::path& path);

// Seeded split into (train, test); `test_fraction` of the points (rounded
// down, at least one of each side) go to test. Relative order is preserved
// within each side.
std::pair<Dataset, Dataset> SplitTrainTest(const Dataset& dataset,
                                           double test_fraction,
                                           uint64_t seed);

}  // namespace sisa

#endif  // SISA_DATASET_H_
