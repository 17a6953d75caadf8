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

#include "sisa/metrics.h"

#include <cmath>
#include <string>
#include <vector>

#include "sisa/errors.h"

namespace sisa {
namespace {

void CheckLengths(size_t preds, size_t truth) {
  Require(preds > 0, "metric: empty input");
  Require(preds == truth, "metric: " + std::to_string(preds) + " predictions vs " +
                              std::to_string(truth) + " targets");
}

}  // namespace

double Accuracy(std::span<const int> preds, std::span<const int> truth) {
  CheckLengths(preds.size(), truth.size());
  size_t hits = 0;
  for (size_t i = 0; i < preds.size(); ++i) hits += preds[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double MacroF1(std::span<const int> preds, std::span<const int> truth,
               int num_classes) {
  CheckLengths(preds.size(), truth.size());
  Require(num_classes >= 2, "macro_f1: needs at least 2 classes");
  std::vector<size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  std::vector<bool> present(num_classes, false);
  for (size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i];
    const int t = truth[i];
    Require(p >= 0 && p < num_classes && t >= 0 && t < num_classes,
            "macro_f1: label out of range");
    present[t] = true;
    if (p == t) {
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < num_classes; ++c) {
    if (!present[c]) continue;
    ++counted;
    const double precision =
        tp[c] + fp[c] == 0 ? 0.0 : static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]);
    const double recall = static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]);
    if (precision + recall > 0.0) sum += 2.0 * precision * recall / (precision + recall);
  }
  return sum / counted;
}

double MeanAbsoluteError(std::span<const double> preds,
                         std::span<const double> truth) {
  CheckLengths(preds.size(), truth.size());
  double sum = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) sum += std::fabs(preds[i] - truth[i]);
  return sum / static_cast<double>(preds.size());
}

double RootMeanSquaredError(std::span<const double> preds,
                            std::span<const double> truth) {
  CheckLengths(preds.size(), truth.size());
  double sum = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - truth[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(preds.size()));
}

}  // namespace sisa
