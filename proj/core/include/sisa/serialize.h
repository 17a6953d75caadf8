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

// On-disk form of models and optimizer state.
//
// A model is a text manifest holding the architecture plus a binary blob of
// the flat parameter vector as little-endian IEEE-754 doubles, in canonical
// order. Round-trips are bit-exact.

#ifndef SISA_SERIALIZE_H_
#define SISA_SERIALIZE_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sisa/adam.h"
#include "sisa/kv.h"
#include "sisa/model.h"

namespace sisa {

std::string EncodeDoubles(std::span<const double> values);
// Throws IntegrityError when the byte count is not `expected_count * 8`.
std::vector<double> DecodeDoubles(std::string_view bytes,
                                  size_t expected_count);

void WriteArch(const ArchDescriptor& arch, KeyValueFile& kv);
ArchDescriptor ReadArch(const KeyValueFile& kv);

// Writes `<stem>.txt` (manifest) and `<stem>.bin` (parameters) into `dir`.
void SaveModel(const ModelParams& model, const std::filesystem::path& dir,
               const std::string& stem = "model");
ModelParams LoadModel(const std::filesystem::path& dir,
                      const std::string& stem = "model");

// Moments are stored as one blob: first moment then second moment.
void WriteOptimizerHeader(const OptimizerState& state, KeyValueFile& kv);
std::string EncodeOptimizerMoments(const OptimizerState& state);
OptimizerState ReadOptimizer(const KeyValueFile& kv, std::string_view blob,
                             size_t num_params);

}  // namespace sisa

#endif  // SISA_SERIALIZE_H_
