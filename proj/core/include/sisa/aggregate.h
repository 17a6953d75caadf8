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

// Turning shard models into one predictor.
//
// SISA aggregates member outputs at inference time: a majority vote over
// argmax labels for classification, the mean of scalar outputs for
// regression. SISA++ instead averages the members' parameters once,
// M_A = (1/N) * sum_i M_i, and serves the single merged model, so a query
// costs one forward pass whatever N is.

#ifndef SISA_AGGREGATE_H_
#define SISA_AGGREGATE_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sisa/model.h"

namespace sisa {

class Run;

enum class EnsembleMode { kMajorityVote, kMeanPrediction, kWeightAverage };

std::string ToString(EnsembleMode mode);
// Accepts `vote`, `mean`, `merge` (and the long names).
EnsembleMode ParseEnsembleMode(std::string_view text);

// Elementwise parameter mean of merge-compatible members. Members are
// accumulated in the given order with Neumaier compensation, then divided
// by N. Throws InvalidArgumentError for an empty list or a descriptor
// mismatch (naming the first mismatching pair).
ModelParams WeightAverage(std::span<const ModelParams> members);

// Most-voted class; ties go to the lowest class index.
int MajorityVote(std::span<const int> votes, int num_classes);

class EnsembleModel {
 public:
  // Validates mode/task compatibility; weight-average mode merges members
  // immediately and caches the result.
  EnsembleModel(std::vector<ModelParams> members, EnsembleMode mode);

  EnsembleMode mode() const { return mode_; }
  const std::vector<ModelParams>& members() const { return members_; }
  // Present only in weight-average mode.
  const std::optional<ModelParams>& merged() const { return merged_; }

  // Class index (as a double) or regression value.
  double Predict(std::span<const double> features) const;

 private:
  std::vector<ModelParams> members_;
  EnsembleMode mode_;
  std::optional<ModelParams> merged_;
};

double PredictEnsemble(const EnsembleModel& ensemble,
                       std::span<const double> features);

// The SISA vote/mean mode matching a task.
EnsembleMode DefaultEnsembleMode(const Task& task);

// Weight average of the live shard models of `generation` (current when
// omitted). Cached under the generation's `merged/` directory; the first
// caller writes it, later callers read it. Throws InvalidArgumentError when
// no shard is live.
ModelParams MergedModelOfRun(const Run& run,
                             std::optional<int> generation = std::nullopt);

// Ensemble over the live shard models of a run generation.
EnsembleModel EnsembleOfRun(const Run& run, EnsembleMode mode,
                            std::optional<int> generation = std::nullopt);

}  // namespace sisa

#endif  // SISA_AGGREGATE_H_
