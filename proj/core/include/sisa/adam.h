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

#ifndef SISA_ADAM_H_
#define SISA_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "sisa/model.h"

namespace sisa {

struct AdamHyperparams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamHyperparams&,
                         const AdamHyperparams&) = default;
};

struct OptimizerState {
  uint64_t step_count = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  AdamHyperparams hyper;

  // Fresh state (t = 0, zero moments) for `num_params` parameters.
  static OptimizerState Fresh(size_t num_params, AdamHyperparams hyper = {});

  friend bool operator==(const OptimizerState&,
                         const OptimizerState&) = default;
};

struct AdamResult {
  ModelParams model;
  OptimizerState state;
};

// One bias-corrected Adam update. Pure: the inputs are not modified.
AdamResult AdamStep(const ModelParams& model, const OptimizerState& state,
                    std::span<const double> grad);

// Same update applied in place; used by the training loop.
void AdamStepInPlace(ModelParams& model, OptimizerState& state,
                     std::span<const double> grad);

}  // namespace sisa

#endif  // SISA_ADAM_H_
