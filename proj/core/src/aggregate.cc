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

#include "sisa/aggregate.h"

#include <cmath>
#include <functional>
#include <system_error>
#include <thread>

#include "sisa/errors.h"
#include "sisa/run.h"
#include "sisa/serialize.h"

namespace sisa {
namespace {

namespace fs = std::filesystem;

}  // namespace

std::string ToString(EnsembleMode mode) {
  switch (mode) {
    case EnsembleMode::kMajorityVote:
      return "vote";
    case EnsembleMode::kMeanPrediction:
      return "mean";
    case EnsembleMode::kWeightAverage:
      return "merge";
  }
  return "unknown";
}

EnsembleMode ParseEnsembleMode(std::string_view text) {
  if (text == "vote" || text == "majority_vote") return EnsembleMode::kMajorityVote;
  if (text == "mean" || text == "mean_prediction") return EnsembleMode::kMeanPrediction;
  if (text == "merge" || text == "weight_average") return EnsembleMode::kWeightAverage;
  throw InvalidArgumentError("unknown ensemble mode '" + std::string(text) + "'");
}

ModelParams WeightAverage(std::span<const ModelParams> members) {
  Require(!members.empty(), "weight_average: no members");
  for (size_t i = 1; i < members.size(); ++i) {
    if (!members[0].MergeCompatibleWith(members[i])) {
      throw InvalidArgumentError("weight_average: members 0 and " + std::to_string(i) +
                                 " have different architectures");
    }
  }
  const size_t n = members[0].params.size();
  for (const ModelParams& m : members) {
    Require(m.params.size() == n, "weight_average: parameter length mismatch");
  }

  // M_N accumulates the members in order; M_A = M_N / N.
  ModelParams merged{members[0].arch, members[0].params};
  std::vector<double> compensation(n, 0.0);
  for (size_t i = 1; i < members.size(); ++i) {
    const std::vector<double>& x = members[i].params;
    for (size_t j = 0; j < n; ++j) {
      const double sum = merged.params[j];
      const double t = sum + x[j];
      compensation[j] += std::fabs(sum) >= std::fabs(x[j]) ? (sum - t) + x[j]
                                                           : (x[j] - t) + sum;
      merged.params[j] = t;
    }
  }
  const double count = static_cast<double>(members.size());
  for (size_t j = 0; j < n; ++j) {
    double total = merged.params[j];
    if (compensation[j] != 0.0) total += compensation[j];
    merged.params[j] = total / count;
  }
  return merged;
}

int MajorityVote(std::span<const int> votes, int num_classes) {
  Require(!votes.empty(), "majority_vote: no votes");
  Require(num_classes >= 1, "majority_vote: no classes");
  std::vector<int> tally(num_classes, 0);
  for (int v : votes) {
    Require(v >= 0 && v < num_classes, "majority_vote: vote out of range");
    ++tally[v];
  }
  int best = 0;
  for (int c = 1; c < num_classes; ++c) {
    if (tally[c] > tally[best]) best = c;
  }
  return best;
}

EnsembleMode DefaultEnsembleMode(const Task& task) {
  return task.is_classification() ? EnsembleMode::kMajorityVote
                                  : EnsembleMode::kMeanPrediction;
}

EnsembleModel::EnsembleModel(std::vector<ModelParams> members, EnsembleMode mode)
    : members_(std::move(members)), mode_(mode) {
  Require(!members_.empty(), "ensemble: no members");
  const Task& task = members_[0].arch.task;
  for (const ModelParams& m : members_) {
    Require(m.arch.task == task, "ensemble: members disagree on the task");
  }
  switch (mode_) {
    case EnsembleMode::kMajorityVote:
      Require(task.is_classification(), "ensemble: majority vote needs a classification task");
      break;
    case EnsembleMode::kMeanPrediction:
      Require(!task.is_classification(), "ensemble: mean prediction needs a regression task");
      break;
    case EnsembleMode::kWeightAverage:
      merged_ = WeightAverage(members_);
      break;
  }
}

double EnsembleModel::Predict(std::span<const double> features) const {
  switch (mode_) {
    case EnsembleMode::kWeightAverage:
      return sisa::Predict(*merged_, features);
    case EnsembleMode::kMajorityVote: {
      std::vector<int> votes;
      votes.reserve(members_.size());
      for (const ModelParams& m : members_) {
        votes.push_back(static_cast<int>(sisa::Predict(m, features)));
      }
      return MajorityVote(votes, members_[0].arch.task.num_classes);
    }
    case EnsembleMode::kMeanPrediction: {
      double sum = 0.0;
      for (const ModelParams& m : members_) sum += sisa::Predict(m, features);
      return sum / static_cast<double>(members_.size());
    }
  }
  throw InvalidArgumentError("ensemble: unknown mode");
}

double PredictEnsemble(const EnsembleModel& ensemble,
                       std::span<const double> features) {
  return ensemble.Predict(features);
}

ModelParams MergedModelOfRun(const Run& run, std::optional<int> generation) {
  const int gen = generation.value_or(run.current_generation());
  const fs::path dir = run.GenerationDir(gen) / "merged";
  if (fs::exists(dir / "model.txt")) return LoadModel(dir);

  std::vector<ModelParams> members;
  for (auto& [shard, model] : run.ShardModels(gen)) members.push_back(std::move(model));
  Require(!members.empty(), "merged model: generation " + std::to_string(gen) +
                                " has no live shards");
  ModelParams merged = WeightAverage(members);

  fs::path tmp = dir;
  tmp += ".partial-" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  std::error_code ec;
  fs::remove_all(tmp, ec);
  SaveModel(merged, tmp);
  fs::rename(tmp, dir, ec);
  if (ec) {
    // Another writer published first; its bytes are identical.
    fs::remove_all(tmp, ec);
  }
  return merged;
}

EnsembleModel EnsembleOfRun(const Run& run, EnsembleMode mode,
                            std::optional<int> generation) {
  const int gen = generation.value_or(run.current_generation());
  if (mode == EnsembleMode::kWeightAverage) {
    return EnsembleModel({MergedModelOfRun(run, gen)}, mode);
  }
  std::vector<ModelParams> members;
  for (auto& [shard, model] : run.ShardModels(gen)) members.push_back(std::move(model));
  return EnsembleModel(std::move(members), mode);
}

}  // namespace sisa
