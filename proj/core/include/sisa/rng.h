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

// Deterministic random streams keyed by a structural path.
//
// A stream is identified by (master_seed, shard, stage, purpose) and never by
// data values, so a retrain on fewer points replays exactly the draws that a
// from-scratch run on the same points would see. The generator is a
// counter-based SplitMix64; its full state is the path key plus a draw
// counter, which makes it trivial to checkpoint.
//
// The standard <random> distributions are implementation-defined, so the
// uniform/normal/shuffle mappings below are written out explicitly to keep
// results identical across standard libraries.

#ifndef SISA_RNG_H_
#define SISA_RNG_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace sisa {

// Marks a path component as absent (e.g. the init stream has no stage).
inline constexpr int64_t kNoIndex = -1;

struct RngPath {
  uint64_t master_seed = 0;
  int64_t shard = kNoIndex;
  int64_t stage = kNoIndex;
  std::string purpose;

  static RngPath Init(uint64_t master_seed) {
    return {master_seed, kNoIndex, kNoIndex, "init"};
  }
  static RngPath Shuffle(uint64_t master_seed, int64_t shard, int64_t stage) {
    return {master_seed, shard, stage, "shuffle"};
  }

  // `seed/shard/stage/purpose`, with `-` for absent components.
  std::string ToString() const;
  static RngPath FromString(std::string_view text);

  friend bool operator==(const RngPath&, const RngPath&) = default;
};

// 64-bit FNV-1a; used for user-id hashing and digests.
uint64_t Fnv1a64(std::string_view bytes, uint64_t basis = 0xcbf29ce484222325ULL);
uint64_t Mix64(uint64_t x);

class RngStream {
 public:
  explicit RngStream(const RngPath& path);
  // Restores a stream that has already produced `draws` values.
  RngStream(const RngPath& path, uint64_t draws);

  uint64_t NextU64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double NextUniform();
  // Uniform in [lo, hi).
  double NextUniform(double lo, double hi);
  // Standard normal via Box-Muller (consumes two draws).
  double NextNormal();
  // Unbiased integer in [0, bound); bound must be positive.
  uint64_t NextBelow(uint64_t bound);

  // Fisher-Yates shuffle in place.
  template <typename T>
  void Shuffle(std::span<T> values) {
    for (size_t i = values.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(NextBelow(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  const RngPath& path() const { return path_; }
  uint64_t draws() const { return draws_; }

 private:
  RngPath path_;
  uint64_t key_;
  uint64_t draws_ = 0;
};

}  // namespace sisa

#endif  // SISA_RNG_H_
