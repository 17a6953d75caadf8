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

#include "sisa/kv.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "sisa/errors.h"

namespace sisa {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T ParseInteger(std::string_view text) {
  text = Trim(text);
  T value{};
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw IoError("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("cannot format double");
  return std::string(buf, ptr);
}

double ParseDouble(std::string_view text) {
  text = Trim(text);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw IoError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

int64_t ParseInt(std::string_view text) { return ParseInteger<int64_t>(text); }
uint64_t ParseUint(std::string_view text) {
  return ParseInteger<uint64_t>(text);
}

std::vector<std::string> SplitString(std::string_view text, char sep) {
  std::vector<std::string> parts;
  if (text.empty()) return parts;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      break;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::string JoinStrings(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buf.str();
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

KeyValueFile KeyValueFile::Parse(std::string_view text) {
  KeyValueFile kv;
  size_t line_no = 0;
  for (const std::string& raw : SplitString(text, '\n')) {
    ++line_no;
    const std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw IoError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw IoError("line " + std::to_string(line_no) + ": empty key");
    }
    if (kv.Has(key)) {
      throw IoError("duplicate key '" + std::string(key) + "'");
    }
    kv.entries_.emplace_back(std::string(key),
                             std::string(Trim(line.substr(eq + 1))));
  }
  return kv;
}

KeyValueFile KeyValueFile::Load(const std::filesystem::path& path) {
  try {
    return Parse(ReadFile(path));
  } catch (const NotFoundError&) {
    throw;
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string KeyValueFile::Format() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

void KeyValueFile::Save(const std::filesystem::path& path) const {
  WriteFileAtomic(path, Format());
}

bool KeyValueFile::Has(std::string_view key) const {
  for (const auto& entry : entries_) {
    if (entry.first == key) return true;
  }
  return false;
}

void KeyValueFile::Set(std::string_view key, std::string value) {
  for (auto& entry : entries_) {
    if (entry.first == key) {
      entry.second = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::string(key), std::move(value));
}

void KeyValueFile::SetInt(std::string_view key, int64_t value) {
  Set(key, std::to_string(value));
}
void KeyValueFile::SetUint(std::string_view key, uint64_t value) {
  Set(key, std::to_string(value));
}
void KeyValueFile::SetDouble(std::string_view key, double value) {
  Set(key, FormatDouble(value));
}

void KeyValueFile::SetIntList(std::string_view key,
                              const std::vector<int64_t>& values) {
  std::vector<std::string> parts;
  parts.reserve(values.size());
  for (int64_t v : values) parts.push_back(std::to_string(v));
  Set(key, JoinStrings(parts, ','));
}

void KeyValueFile::SetUintList(std::string_view key,
                               const std::vector<uint64_t>& values) {
  std::vector<std::string> parts;
  parts.reserve(values.size());
  for (uint64_t v : values) parts.push_back(std::to_string(v));
  Set(key, JoinStrings(parts, ','));
}

std::optional<std::string> KeyValueFile::Find(std::string_view key) const {
  for (const auto& entry : entries_) {
    if (entry.first == key) return entry.second;
  }
  return std::nullopt;
}

const std::string& KeyValueFile::Get(std::string_view key) const {
  for (const auto& entry : entries_) {
    if (entry.first == key) return entry.second;
  }
  throw IoError("missing key '" + std::string(key) + "'");
}

int64_t KeyValueFile::GetInt(std::string_view key) const {
  return ParseInt(Get(key));
}
uint64_t KeyValueFile::GetUint(std::string_view key) const {
  return ParseUint(Get(key));
}
double KeyValueFile::GetDouble(std::string_view key) const {
  return ParseDouble(Get(key));
}

std::vector<int64_t> KeyValueFile::GetIntList(std::string_view key) const {
  std::vector<int64_t> out;
  for (const std::string& part : SplitString(Get(key), ',')) {
    out.push_back(ParseInt(part));
  }
  return out;
}

std::vector<uint64_t> KeyValueFile::GetUintList(std::string_view key) const {
  std::vector<uint64_t> out;
  for (const std::string& part : SplitString(Get(key), ',')) {
    out.push_back(ParseUint(part));
  }
  return out;
}

std::vector<std::string> KeyValueFile::GetStringList(
    std::string_view key) const {
  return SplitString(Get(key), ',');
}

}  // namespace sisa
