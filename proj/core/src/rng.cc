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

#include "sisa/rng.h"

#include <cmath>
#include <numbers>

#include "sisa/errors.h"
#include "sisa/kv.h"

namespace sisa {
namespace {

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

uint64_t KeyOf(const RngPath& path) {
  uint64_t h = Mix64(path.master_seed ^ 0x5153495341ULL);
  h = Mix64(h ^ static_cast<uint64_t>(path.shard));
  h = Mix64((h + kGolden) ^ static_cast<uint64_t>(path.stage));
  return Mix64(h ^ Fnv1a64(path.purpose));
}

std::string IndexText(int64_t index) {
  return index == kNoIndex ? "-" : std::to_string(index);
}

int64_t ParseIndex(std::string_view text) {
  return text == "-" ? kNoIndex : ParseInt(text);
}

}  // namespace

uint64_t Mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

uint64_t Fnv1a64(std::string_view bytes, uint64_t basis) {
  uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RngPath::ToString() const {
  return std::to_string(master_seed) + "/" + IndexText(shard) + "/" +
         IndexText(stage) + "/" + purpose;
}

RngPath RngPath::FromString(std::string_view text) {
  const std::vector<std::string> parts = SplitString(text, '/');
  if (parts.size() != 4) {
    throw IoError("malformed rng path '" + std::string(text) + "'");
  }
  return {ParseUint(parts[0]), ParseIndex(parts[1]), ParseIndex(parts[2]),
          parts[3]};
}

RngStream::RngStream(const RngPath& path) : RngStream(path, 0) {}

RngStream::RngStream(const RngPath& path, uint64_t draws)
    : path_(path), key_(KeyOf(path)), draws_(draws) {}

uint64_t RngStream::NextU64() {
  // SplitMix64 evaluated at position `draws_`.
  ++draws_;
  return Mix64(key_ + draws_ * kGolden);
}

double RngStream::NextUniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double RngStream::NextUniform(double lo, double hi) {
  return lo + (hi - lo) * NextUniform();
}

double RngStream::NextNormal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - NextUniform();
  const double u2 = NextUniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t RngStream::NextBelow(uint64_t bound) {
  Require(bound > 0, "NextBelow: bound must be positive");
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % bound;
}

}  // namespace sisa
