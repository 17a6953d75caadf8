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

#ifndef SISA_METRICS_H_
#define SISA_METRICS_H_

#include <span>

namespace sisa {

// All metrics throw InvalidArgumentError on empty or unequal-length inputs.

double Accuracy(std::span<const int> preds, std::span<const int> truth);

// Unweighted mean of per-class F1 over the classes present in `truth`.
// A class with precision + recall = 0 scores 0. Requires C >= 2 and labels
// in [0, C).
double MacroF1(std::span<const int> preds, std::span<const int> truth,
               int num_classes);

double MeanAbsoluteError(std::span<const double> preds,
                         std::span<const double> truth);
double RootMeanSquaredError(std::span<const double> preds,
                            std::span<const double> truth);

}  // namespace sisa

#endif  // SISA_METRICS_H_
