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

#include "sisa/adam.h"

#include <cmath>

#include "sisa/errors.h"

namespace sisa {

OptimizerState OptimizerState::Fresh(size_t num_params, AdamHyperparams hyper) {
  OptimizerState state;
  state.first_moment.assign(num_params, 0.0);
  state.second_moment.assign(num_params, 0.0);
  state.hyper = hyper;
  return state;
}

void AdamStepInPlace(ModelParams& model, OptimizerState& state,
                     std::span<const double> grad) {
  const size_t n = model.params.size();
  Require(grad.size() == n, "adam: gradient length " +
                                std::to_string(grad.size()) +
                                " does not match " + std::to_string(n) +
                                " parameters");
  Require(state.first_moment.size() == n && state.second_moment.size() == n,
          "adam: optimizer state does not match the model");
  const AdamHyperparams& h = state.hyper;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);
  for (size_t j = 0; j < n; ++j) {
    double& m = state.first_moment[j];
    double& v = state.second_moment[j];
    m = h.beta1 * m + (1.0 - h.beta1) * grad[j];
    v = h.beta2 * v + (1.0 - h.beta2) * grad[j] * grad[j];
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    model.params[j] -= h.lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

AdamResult AdamStep(const ModelParams& model, const OptimizerState& state,
                    std::span<const double> grad) {
  AdamResult result{model, state};
  AdamStepInPlace(result.model, result.state, grad);
  return result;
}

}  // namespace sisa
