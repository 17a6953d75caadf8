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

#include "sisa/model.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "sisa/errors.h"

namespace sisa {
namespace {

std::atomic<uint64_t> g_forward_passes{0};
thread_local uint64_t t_forward_passes = 0;

struct Layer {
  size_t weights;  // offset of W[0][0]
  size_t bias;     // offset of b[0]
  int in;
  int out;
};

std::vector<Layer> Layers(const ArchDescriptor& arch) {
  const std::vector<int> widths = arch.LayerWidths();
  std::vector<Layer> layers;
  size_t offset = 0;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    layers.push_back({offset, offset + static_cast<size_t>(in) * out, in, out});
    offset += static_cast<size_t>(in + 1) * out;
  }
  return layers;
}

double Activate(Activation act, double z) {
  return act == Activation::kRelu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Derivative expressed through the activation output `a` and input `z`.
double ActivateDerivative(Activation act, double z, double a) {
  return act == Activation::kRelu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - a * a;
}

// Pre-activations and activations of every layer for one input.
struct Trace {
  std::vector<std::vector<double>> pre;   // z per layer
  std::vector<std::vector<double>> post;  // post[0] = input, post[l+1] = a_l
};

void RunLayers(const ModelParams& model, const std::vector<Layer>& layers,
               std::span<const double> features, Trace& trace) {
  const auto& p = model.params;
  trace.pre.resize(layers.size());
  trace.post.resize(layers.size() + 1);
  trace.post[0].assign(features.begin(), features.end());
  for (size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    const std::vector<double>& in = trace.post[l];
    std::vector<double>& z = trace.pre[l];
    z.assign(layer.out, 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double* w = &p[layer.weights + static_cast<size_t>(o) * layer.in];
      double sum = p[layer.bias + o];
      for (int i = 0; i < layer.in; ++i) sum += w[i] * in[i];
      z[o] = sum;
    }
    std::vector<double>& a = trace.post[l + 1];
    if (l + 1 < layers.size()) {
      a.resize(layer.out);
      for (int o = 0; o < layer.out; ++o) {
        a[o] = Activate(model.arch.activation, z[o]);
      }
    } else {
      a = z;  // output head works on raw logits / prediction
    }
  }
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max);
    total += probs[i];
  }
  for (double& v : probs) v /= total;
  return probs;
}

double LogSumExp(std::span<const double> logits) {
  const double max = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - max);
  return max + std::log(total);
}

void CheckFeatures(const ArchDescriptor& arch, size_t n) {
  if (n != static_cast<size_t>(arch.input_dim)) {
    throw InvalidArgumentError("feature length " + std::to_string(n) +
                               " does not match input_dim " +
                               std::to_string(arch.input_dim));
  }
}

void CheckTarget(const ArchDescriptor& arch, const DataPoint& point) {
  CheckFeatures(arch, point.features.size());
  if (arch.task.is_classification()) {
    const int label = point.label();
    if (label < 0 || label >= arch.output_dim ||
        static_cast<double>(label) != point.target) {
      throw InvalidArgumentError("point " + std::to_string(point.point_id) +
                                 ": label out of range");
    }
  }
}

template <typename Get>
LossAndGrad LossAndGradImpl(const ModelParams& model, size_t batch_size,
                            Get get_point) {
  Require(batch_size > 0, "loss_and_grad: empty batch");
  const ArchDescriptor& arch = model.arch;
  Require(model.params.size() == ParamCount(arch),
          "loss_and_grad: parameter vector does not match architecture");
  const std::vector<Layer> layers = Layers(arch);
  const double scale = 1.0 / static_cast<double>(batch_size);

  LossAndGrad result;
  result.grad.assign(model.params.size(), 0.0);
  Trace trace;
  std::vector<double> delta;
  std::vector<double> prev_delta;

  for (size_t b = 0; b < batch_size; ++b) {
    const DataPoint& point = get_point(b);
    CheckTarget(arch, point);
    RunLayers(model, layers, point.features, trace);
    const std::vector<double>& out = trace.post.back();

    // delta = dLoss/d(output pre-activation), already scaled by 1/B.
    if (arch.task.is_classification()) {
      const int label = point.label();
      result.loss += (LogSumExp(out) - out[label]) * scale;
      delta = Softmax(out);
      delta[label] -= 1.0;
      for (double& d : delta) d *= scale;
    } else {
      const double err = out[0] - point.target;
      result.loss += err * err * scale;
      delta.assign(1, 2.0 * err * scale);
    }

    for (size_t l = layers.size(); l-- > 0;) {
      const Layer& layer = layers[l];
      const std::vector<double>& in = trace.post[l];
      for (int o = 0; o < layer.out; ++o) {
        double* gw =
            &result.grad[layer.weights + static_cast<size_t>(o) * layer.in];
        for (int i = 0; i < layer.in; ++i) gw[i] += delta[o] * in[i];
        result.grad[layer.bias + o] += delta[o];
      }
      if (l == 0) break;
      prev_delta.assign(layer.in, 0.0);
      for (int o = 0; o < layer.out; ++o) {
        const double* w =
            &model.params[layer.weights + static_cast<size_t>(o) * layer.in];
        for (int i = 0; i < layer.in; ++i) prev_delta[i] += w[i] * delta[o];
      }
      const std::vector<double>& z_prev = trace.pre[l - 1];
      for (int i = 0; i < layer.in; ++i) {
        prev_delta[i] *= ActivateDerivative(arch.activation, z_prev[i], in[i]);
      }
      delta.swap(prev_delta);
    }
  }
  return result;
}

}  // namespace

std::string ToString(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "tanh";
}

Activation ParseActivation(std::string_view text) {
  if (text == "relu") return Activation::kRelu;
  if (text == "tanh") return Activation::kTanh;
  throw InvalidArgumentError("unknown activation '" + std::string(text) + "'");
}

ArchDescriptor ArchDescriptor::For(int input_dim, std::vector<int> hidden_dims,
                                   Task task, Activation activation) {
  ArchDescriptor arch;
  arch.input_dim = input_dim;
  arch.hidden_dims = std::move(hidden_dims);
  arch.output_dim = task.is_classification() ? task.num_classes : 1;
  arch.task = task;
  arch.activation = activation;
  arch.Validate();
  return arch;
}

void ArchDescriptor::Validate() const {
  Require(input_dim > 0, "arch: input_dim must be positive");
  for (int h : hidden_dims) Require(h > 0, "arch: hidden widths must be positive");
  if (task.is_classification()) {
    Require(task.num_classes >= 2, "arch: classification needs at least 2 classes");
    Require(output_dim == task.num_classes,
            "arch: classification output_dim must equal the class count");
  } else {
    Require(output_dim == 1, "arch: regression output_dim must be 1");
  }
}

std::vector<int> ArchDescriptor::LayerWidths() const {
  std::vector<int> widths;
  widths.reserve(hidden_dims.size() + 2);
  widths.push_back(input_dim);
  widths.insert(widths.end(), hidden_dims.begin(), hidden_dims.end());
  widths.push_back(output_dim);
  return widths;
}

size_t ParamCount(const ArchDescriptor& arch) {
  const std::vector<int> widths = arch.LayerWidths();
  size_t count = 0;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    count += static_cast<size_t>(widths[l] + 1) * widths[l + 1];
  }
  return count;
}

ModelParams ModelParams::Zeros(const ArchDescriptor& arch) {
  arch.Validate();
  return {arch, std::vector<double>(ParamCount(arch), 0.0)};
}

ModelParams InitModel(const ArchDescriptor& arch, RngStream& rng) {
  ModelParams model = ModelParams::Zeros(arch);
  for (const Layer& layer : Layers(arch)) {
    const double s = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    const size_t n = static_cast<size_t>(layer.in) * layer.out;
    for (size_t j = 0; j < n; ++j) {
      model.params[layer.weights + j] = rng.NextUniform(-s, s);
    }
  }
  return model;
}

ModelParams InitModel(const ArchDescriptor& arch, const RngPath& path) {
  RngStream rng(path);
  return InitModel(arch, rng);
}

std::vector<double> Forward(const ModelParams& model,
                            std::span<const double> features) {
  CheckFeatures(model.arch, features.size());
  Require(model.params.size() == ParamCount(model.arch),
          "forward: parameter vector does not match architecture");
  g_forward_passes.fetch_add(1, std::memory_order_relaxed);
  ++t_forward_passes;
  Trace trace;
  RunLayers(model, Layers(model.arch), features, trace);
  if (model.arch.task.is_classification()) return Softmax(trace.post.back());
  return trace.post.back();
}

double Predict(const ModelParams& model, std::span<const double> features) {
  const std::vector<double> out = Forward(model, features);
  if (!model.arch.task.is_classification()) return out[0];
  return static_cast<double>(std::max_element(out.begin(), out.end()) -
                             out.begin());
}

uint64_t ForwardPassCount() {
  return g_forward_passes.load(std::memory_order_relaxed);
}

uint64_t ThreadForwardPassCount() { return t_forward_passes; }

LossAndGrad ComputeLossAndGrad(const ModelParams& model,
                               std::span<const DataPoint* const> batch) {
  return LossAndGradImpl(model, batch.size(),
                         [&](size_t i) -> const DataPoint& { return *batch[i]; });
}

LossAndGrad ComputeLossAndGrad(const ModelParams& model,
                               std::span<const DataPoint> batch) {
  return LossAndGradImpl(model, batch.size(),
                         [&](size_t i) -> const DataPoint& { return batch[i]; });
}

double ComputeLoss(const ModelParams& model, std::span<const DataPoint> batch) {
  Require(!batch.empty(), "loss: empty batch");
  const std::vector<Layer> layers = Layers(model.arch);
  const double scale = 1.0 / static_cast<double>(batch.size());
  Trace trace;
  double loss = 0.0;
  for (const DataPoint& point : batch) {
    CheckTarget(model.arch, point);
    RunLayers(model, layers, point.features, trace);
    const std::vector<double>& out = trace.post.back();
    if (model.arch.task.is_classification()) {
      loss += (LogSumExp(out) - out[point.label()]) * scale;
    } else {
      const double err = out[0] - point.target;
      loss += err * err * scale;
    }
  }
  return loss;
}

}  // namespace sisa
