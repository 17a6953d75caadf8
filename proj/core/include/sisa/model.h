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

// Dense feed-forward networks over 64-bit reals.
//
// Parameters live in one flat vector, layer-major. Each layer stores its
// weight matrix row-major as [out][in], followed by its bias vector [out].
// Hidden layers use the configured activation; the output layer is a softmax
// head for classification and a linear scalar head for regression.

#ifndef SISA_MODEL_H_
#define SISA_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sisa/dataset.h"
#include "sisa/rng.h"

namespace sisa {

enum class Activation { kRelu, kTanh };

std::string ToString(Activation activation);
Activation ParseActivation(std::string_view text);

struct ArchDescriptor {
  int input_dim = 0;
  std::vector<int> hidden_dims;
  int output_dim = 0;
  Task task;
  Activation activation = Activation::kRelu;

  // Builds the descriptor for a task; the output width follows the task.
  static ArchDescriptor For(int input_dim, std::vector<int> hidden_dims,
                            Task task,
                            Activation activation = Activation::kRelu);

  // Throws InvalidArgumentError when the invariants do not hold.
  void Validate() const;

  // Layer widths including input and output: {in, h0, ..., out}.
  std::vector<int> LayerWidths() const;

  friend bool operator==(const ArchDescriptor&,
                         const ArchDescriptor&) = default;
};

size_t ParamCount(const ArchDescriptor& arch);

struct ModelParams {
  ArchDescriptor arch;
  std::vector<double> params;

  // All-zero parameters.
  static ModelParams Zeros(const ArchDescriptor& arch);

  bool MergeCompatibleWith(const ModelParams& other) const {
    return arch == other.arch;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Glorot-uniform weights, s = sqrt(6 / (in + out)) per layer, zero biases.
ModelParams InitModel(const ArchDescriptor& arch, RngStream& rng);
ModelParams InitModel(const ArchDescriptor& arch, const RngPath& path);

// Class probabilities (classification) or a single prediction (regression).
std::vector<double> Forward(const ModelParams& model,
                            std::span<const double> features);

// argmax of Forward for classification (lowest index on ties), the scalar
// output for regression.
double Predict(const ModelParams& model, std::span<const double> features);

// Count of Forward invocations, process-wide and on the calling thread.
// Used to check inference cost.
uint64_t ForwardPassCount();
uint64_t ThreadForwardPassCount();

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean cross-entropy (classification) or mean squared error (regression)
// over the batch, with the gradient with respect to every parameter.
LossAndGrad ComputeLossAndGrad(const ModelParams& model,
                               std::span<const DataPoint* const> batch);
LossAndGrad ComputeLossAndGrad(const ModelParams& model,
                               std::span<const DataPoint> batch);

// Loss only; same definition as ComputeLossAndGrad.
double ComputeLoss(const ModelParams& model,
                   std::span<const DataPoint> batch);

}  // namespace sisa

#endif  // SISA_MODEL_H_
