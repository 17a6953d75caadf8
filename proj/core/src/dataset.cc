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

#include "sisa/dataset.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sisa/errors.h"
#include "sisa/kv.h"
#include "sisa/rng.h"

namespace sisa {

Dataset::Dataset(std::vector<DataPoint> points, int feature_dim, Task task)
    : points_(std::move(points)), feature_dim_(feature_dim), task_(task) {
  Require(feature_dim > 0, "dataset: feature_dim must be positive");
  if (task.is_classification()) {
    Require(task.num_classes >= 2, "dataset: classification needs C >= 2");
  }
  sorted_index_.reserve(points_.size());
  for (size_t i = 0; i < points_.size(); ++i) {
    const DataPoint& p = points_[i];
    const std::string where = "dataset: point " + std::to_string(p.point_id);
    Require(p.features.size() == static_cast<size_t>(feature_dim),
            where + " has " + std::to_string(p.features.size()) +
                " features, expected " + std::to_string(feature_dim));
    Require(p.user_id.find_first_of(",\n\r") == std::string::npos,
            where + ": user id may not contain ',' or line breaks");
    for (double f : p.features) {
      Require(std::isfinite(f), where + ": non-finite feature");
    }
    Require(std::isfinite(p.target), where + ": non-finite target");
    if (task.is_classification()) {
      Require(p.target >= 0 && p.target < task.num_classes &&
                  std::floor(p.target) == p.target,
              where + ": label must be an integer in [0, C)");
    }
    sorted_index_.emplace_back(p.point_id, i);
  }
  std::sort(sorted_index_.begin(), sorted_index_.end());
  for (size_t i = 1; i < sorted_index_.size(); ++i) {
    Require(sorted_index_[i].first != sorted_index_[i - 1].first,
            "dataset: duplicate point id " +
                std::to_string(sorted_index_[i].first));
  }
}

size_t Dataset::IndexOf(PointId id) const {
  const auto it = std::lower_bound(
      sorted_index_.begin(), sorted_index_.end(), id,
      [](const auto& entry, PointId key) { return entry.first < key; });
  if (it == sorted_index_.end() || it->first != id) {
    throw NotFoundError("unknown point id " + std::to_string(id));
  }
  return it->second;
}

bool Dataset::Contains(PointId id) const {
  return std::binary_search(
      sorted_index_.begin(), sorted_index_.end(), std::make_pair(id, size_t{0}),
      [](const auto& a, const auto& b) { return a.first < b.first; });
}

std::string FormatFeatureFile(const Dataset& dataset) {
  std::string out = "#d=" + std::to_string(dataset.feature_dim());
  if (dataset.task().is_classification()) {
    out += ",task=cls,C=" + std::to_string(dataset.task().num_classes);
  } else {
    out += ",task=reg";
  }
  out += '\n';
  for (const DataPoint& p : dataset.points()) {
    out += std::to_string(p.point_id);
    out += ',';
    out += p.user_id;
    out += ',';
    out += dataset.task().is_classification() ? std::to_string(p.label())
                                              : FormatDouble(p.target);
    for (double f : p.features) {
      out += ',';
      out += FormatDouble(f);
    }
    out += '\n';
  }
  return out;
}

Dataset ParseFeatureFile(std::string_view text) {
  const std::vector<std::string> lines = SplitString(text, '\n');
  if (lines.empty() || lines[0].empty() || lines[0][0] != '#') {
    throw IoError("feature file: missing '#d=...' header");
  }
  int d = 0;
  std::string task_name;
  int num_classes = 0;
  for (const std::string& field : SplitString(std::string_view(lines[0]).substr(1), ',')) {
    const size_t eq = field.find('=');
    if (eq == std::string::npos) throw IoError("feature file: bad header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "d") {
      d = static_cast<int>(ParseInt(value));
    } else if (key == "task") {
      task_name = value;
    } else if (key == "C") {
      if (!value.empty()) num_classes = static_cast<int>(ParseInt(value));
    } else {
      throw IoError("feature file: unknown header field '" + key + "'");
    }
  }
  Task task;
  if (task_name == "cls") {
    task = Task::Classification(num_classes);
  } else if (task_name == "reg") {
    task = Task::Regression();
  } else {
    throw IoError("feature file: task must be cls or reg");
  }
  if (d <= 0) throw IoError("feature file: d must be positive");

  std::vector<DataPoint> points;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::vector<std::string> cells = SplitString(line, ',');
    if (cells.size() != static_cast<size_t>(d) + 3) {
      throw IoError("feature file line " + std::to_string(i + 1) + ": expected " +
                    std::to_string(d + 3) + " fields, got " +
                    std::to_string(cells.size()));
    }
    DataPoint p;
    p.point_id = ParseUint(cells[0]);
    p.user_id = cells[1];
    p.target = ParseDouble(cells[2]);
    p.features.reserve(d);
    for (int f = 0; f < d; ++f) p.features.push_back(ParseDouble(cells[3 + f]));
    points.push_back(std::move(p));
  }
  try {
    return Dataset(std::move(points), d, task);
  } catch (const InvalidArgumentError& e) {
    throw IoError(std::string("feature file: ") + e.what());
  }
}

void SaveFeatureFile(const Dataset& dataset, const std::filesystem::path& path) {
  WriteFileAtomic(path, FormatFeatureFile(dataset));
}

Dataset LoadFeatureFile(const std::filesystem::path& path) {
  return ParseFeatureFile(ReadFile(path));
}

std::pair<Dataset, Dataset> SplitTrainTest(const Dataset& dataset,
                                           double test_fraction,
                                           uint64_t seed) {
  Require(dataset.size() >= 2, "split: need at least two points");
  Require(test_fraction > 0.0 && test_fraction < 1.0,
          "split: test_fraction must be in (0, 1)");
  const size_t n = dataset.size();
  size_t n_test = static_cast<size_t>(std::floor(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<size_t>(n_test, 1, n - 1);

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  RngStream rng({seed, kNoIndex, kNoIndex, "split"});
  rng.Shuffle(std::span<size_t>(order));
  std::vector<bool> is_test(n, false);
  for (size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;

  std::vector<DataPoint> train;
  std::vector<DataPoint> test;
  for (size_t i = 0; i < n; ++i) {
    (is_test[i] ? test : train).push_back(dataset.points()[i]);
  }
  return {Dataset(std::move(train), dataset.feature_dim(), dataset.task()),
          Dataset(std::move(test), dataset.feature_dim(), dataset.task())};
}

}  // namespace sisa
