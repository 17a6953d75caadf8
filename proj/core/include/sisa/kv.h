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

// Plain-text `key=value` files. Used for model manifests, checkpoint
// manifests, run/generation metadata, configs and reports.
//
// Format: one entry per line, `#` starts a comment line, blank lines are
// ignored. Keys are unique and keep insertion order on output.

#ifndef SISA_KV_H_
#define SISA_KV_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sisa {

class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile Parse(std::string_view text);
  static KeyValueFile Load(const std::filesystem::path& path);

  std::string Format() const;
  // Writes to a temporary sibling and renames it into place.
  void Save(const std::filesystem::path& path) const;

  bool Has(std::string_view key) const;

  // Setters overwrite an existing key in place.
  void Set(std::string_view key, std::string value);
  void SetInt(std::string_view key, int64_t value);
  void SetUint(std::string_view key, uint64_t value);
  void SetDouble(std::string_view key, double value);
  void SetIntList(std::string_view key, const std::vector<int64_t>& values);
  void SetUintList(std::string_view key, const std::vector<uint64_t>& values);

  // Getters throw IoError for a missing key or an unparsable value.
  const std::string& Get(std::string_view key) const;
  std::optional<std::string> Find(std::string_view key) const;
  int64_t GetInt(std::string_view key) const;
  uint64_t GetUint(std::string_view key) const;
  double GetDouble(std::string_view key) const;
  std::vector<int64_t> GetIntList(std::string_view key) const;
  std::vector<uint64_t> GetUintList(std::string_view key) const;
  std::vector<std::string> GetStringList(std::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Shortest decimal text that round-trips to the same double.
std::string FormatDouble(double value);
double ParseDouble(std::string_view text);
int64_t ParseInt(std::string_view text);
uint64_t ParseUint(std::string_view text);

// Splits on `sep`; an empty input yields an empty list.
std::vector<std::string> SplitString(std::string_view text, char sep);
std::string JoinStrings(const std::vector<std::string>& parts, char sep);

// Atomically replaces `path` with `contents` (temp file + rename).
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view contents);
std::string ReadFile(const std::filesystem::path& path);

}  // namespace sisa

#endif  // SISA_KV_H_
