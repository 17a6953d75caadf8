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

#include "sisa/synth.h"

#include <cmath>
#include <string>
#include <vector>

#include "sisa/errors.h"
#include "sisa/rng.h"

namespace sisa {
namespace {

std::string UserName(int index, int num_users) {
  const int width = std::max<int>(3, static_cast<int>(std::to_string(num_users - 1).size()));
  std::string digits = std::to_string(index);
  digits.insert(0, width - digits.size(), '0');
  return "u" + digits;
}

}  // namespace

SynthSpec SynthSpec::Parse(std::string_view text) {
  SynthSpec spec;
  int num_classes = spec.task.num_classes;
  bool regression = false;
  for (const std::string& field : SplitString(text, ',')) {
    if (field.empty()) continue;
    const size_t eq = field.find('=');
    if (eq == std::string::npos) throw InvalidArgumentError("synth spec: bad field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "task") {
      if (value != "cls" && value != "reg") throw InvalidArgumentError("synth spec: task must be cls or reg");
      regression = value == "reg";
    } else if (key == "n") {
      spec.num_points = static_cast<int>(ParseInt(value));
    } else if (key == "users") {
      spec.num_users = static_cast<int>(ParseInt(value));
    } else if (key == "d") {
      spec.feature_dim = static_cast<int>(ParseInt(value));
    } else if (key == "C") {
      num_classes = static_cast<int>(ParseInt(value));
    } else if (key == "sep") {
      spec.separation = ParseDouble(value);
    } else if (key == "noise") {
      spec.noise_std = ParseDouble(value);
    } else if (key == "seed") {
      spec.seed = ParseUint(value);
    } else {
      throw InvalidArgumentError("synth spec: unknown key '" + key + "'");
    }
  }
  spec.task = regression ? Task::Regression() : Task::Classification(num_classes);
  return spec;
}

std::string SynthSpec::ToString() const {
  std::string out = task.is_classification() ? "task=cls" : "task=reg";
  out += ",n=" + std::to_string(num_points) + ",users=" + std::to_string(num_users) +
         ",d=" + std::to_string(feature_dim);
  if (task.is_classification()) {
    out += ",C=" + std::to_string(task.num_classes) + ",sep=" + FormatDouble(separation);
  } else {
    out += ",noise=" + FormatDouble(noise_std);
  }
  out += ",seed=" + std::to_string(seed);
  return out;
}

Dataset GenerateSynthetic(const SynthSpec& spec) {
  Require(spec.num_points >= 1, "synth: n must be positive");
  Require(spec.feature_dim >= 1, "synth: d must be positive");
  Require(spec.num_users >= 1 && spec.num_users <= spec.num_points,
          "synth: need 1 <= users <= n");
  const int d = spec.feature_dim;
  const bool cls = spec.task.is_classification();
  if (cls) Require(spec.task.num_classes >= 2, "synth: C must be >= 2");
  Require(spec.noise_std >= 0.0, "synth: noise must be non-negative");

  RngStream params_rng({spec.seed, kNoIndex, kNoIndex, "synth-params"});
  RngStream points_rng({spec.seed, kNoIndex, kNoIndex, "synth-points"});

  std::vector<std::vector<double>> centers;
  std::vector<double> weights;
  if (cls) {
    const int c_count = spec.task.num_classes;
    centers.assign(c_count, std::vector<double>(d, 0.0));
    for (int c = 0; c < c_count; ++c) {
      if (c_count <= d) {
        centers[c][c] = spec.separation;
        continue;
      }
      double norm = 0.0;
      for (double& v : centers[c]) {
        v = params_rng.NextNormal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (double& v : centers[c]) v = v / norm * spec.separation;
    }
  } else {
    weights.resize(d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& w : weights) w = params_rng.NextNormal() * scale;
  }

  std::vector<DataPoint> points;
  points.reserve(spec.num_points);
  const int64_t n = spec.num_points;
  for (int64_t i = 0; i < n; ++i) {
    DataPoint p;
    p.point_id = static_cast<PointId>(i);
    const int user = static_cast<int>(i * spec.num_users / n);
    p.user_id = UserName(user, spec.num_users);
    p.features.resize(d);
    if (cls) {
      const int label = static_cast<int>(i % spec.task.num_classes);
      for (int f = 0; f < d; ++f) p.features[f] = centers[label][f] + points_rng.NextNormal();
      p.target = label;
    } else {
      double y = 0.0;
      for (int f = 0; f < d; ++f) {
        p.features[f] = points_rng.NextNormal();
        y += weights[f] * p.features[f];
      }
      p.target = y + spec.noise_std * points_rng.NextNormal();
    }
    points.push_back(std::move(p));
  }
  return Dataset(std::move(points), d, spec.task);
}

}  // namespace sisa
