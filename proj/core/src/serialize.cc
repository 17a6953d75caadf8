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

#include "sisa/serialize.h"

#include <bit>
#include <cstring>

#include "sisa/errors.h"

namespace sisa {

std::string EncodeDoubles(std::span<const double> values) {
  std::string bytes(values.size() * 8, '\0');
  for (size_t i = 0; i < values.size(); ++i) {
    const uint64_t bits = std::bit_cast<uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
  return bytes;
}

std::vector<double> DecodeDoubles(std::string_view bytes,
                                  size_t expected_count) {
  if (bytes.size() != expected_count * 8) {
    throw IntegrityError("blob holds " + std::to_string(bytes.size()) +
                         " bytes, expected " +
                         std::to_string(expected_count * 8));
  }
  std::vector<double> values(expected_count);
  for (size_t i = 0; i < expected_count; ++i) {
    uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b]))
              << (8 * b);
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

void WriteArch(const ArchDescriptor& arch, KeyValueFile& kv) {
  kv.SetInt("input_dim", arch.input_dim);
  kv.SetIntList("hidden_dims", std::vector<int64_t>(arch.hidden_dims.begin(),
                                                    arch.hidden_dims.end()));
  kv.SetInt("output_dim", arch.output_dim);
  kv.Set("task", arch.task.is_classification() ? "cls" : "reg");
  kv.SetInt("num_classes", arch.task.num_classes);
  kv.Set("activation", ToString(arch.activation));
  kv.SetUint("param_count", ParamCount(arch));
}

ArchDescriptor ReadArch(const KeyValueFile& kv) {
  ArchDescriptor arch;
  arch.input_dim = static_cast<int>(kv.GetInt("input_dim"));
  for (int64_t h : kv.GetIntList("hidden_dims")) {
    arch.hidden_dims.push_back(static_cast<int>(h));
  }
  arch.output_dim = static_cast<int>(kv.GetInt("output_dim"));
  const std::string& task = kv.Get("task");
  if (task == "cls") {
    arch.task = Task::Classification(static_cast<int>(kv.GetInt("num_classes")));
  } else if (task == "reg") {
    arch.task = Task::Regression();
  } else {
    throw IoError("unknown task '" + task + "'");
  }
  arch.activation = ParseActivation(kv.Get("activation"));
  try {
    arch.Validate();
  } catch (const InvalidArgumentError& e) {
    throw IoError(std::string("stored architecture is invalid: ") + e.what());
  }
  if (kv.Has("param_count") && kv.GetUint("param_count") != ParamCount(arch)) {
    throw IntegrityError("param_count does not match the architecture");
  }
  return arch;
}

void SaveModel(const ModelParams& model, const std::filesystem::path& dir,
               const std::string& stem) {
  std::filesystem::create_directories(dir);
  KeyValueFile kv;
  kv.Set("format", "sisa-model/1");
  WriteArch(model.arch, kv);
  kv.Set("blob", stem + ".bin");
  kv.Set("encoding", "f64le");
  WriteFileAtomic(dir / (stem + ".bin"), EncodeDoubles(model.params));
  kv.Save(dir / (stem + ".txt"));
}

ModelParams LoadModel(const std::filesystem::path& dir,
                      const std::string& stem) {
  const KeyValueFile kv = KeyValueFile::Load(dir / (stem + ".txt"));
  ModelParams model;
  model.arch = ReadArch(kv);
  model.params = DecodeDoubles(ReadFile(dir / kv.Get("blob")),
                               ParamCount(model.arch));
  return model;
}

void WriteOptimizerHeader(const OptimizerState& state, KeyValueFile& kv) {
  kv.SetUint("adam.step_count", state.step_count);
  kv.SetDouble("adam.lr", state.hyper.lr);
  kv.SetDouble("adam.beta1", state.hyper.beta1);
  kv.SetDouble("adam.beta2", state.hyper.beta2);
  kv.SetDouble("adam.epsilon", state.hyper.epsilon);
}

std::string EncodeOptimizerMoments(const OptimizerState& state) {
  return EncodeDoubles(state.first_moment) + EncodeDoubles(state.second_moment);
}

OptimizerState ReadOptimizer(const KeyValueFile& kv, std::string_view blob,
                             size_t num_params) {
  OptimizerState state;
  state.step_count = kv.GetUint("adam.step_count");
  state.hyper.lr = kv.GetDouble("adam.lr");
  state.hyper.beta1 = kv.GetDouble("adam.beta1");
  state.hyper.beta2 = kv.GetDouble("adam.beta2");
  state.hyper.epsilon = kv.GetDouble("adam.epsilon");
  std::vector<double> both = DecodeDoubles(blob, 2 * num_params);
  state.first_moment.assign(both.begin(), both.begin() + num_params);
  state.second_moment.assign(both.begin() + num_params, both.end());
  return state;
}

}  // namespace sisa
