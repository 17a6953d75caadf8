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

// Unlearning transactions over a Run.
//
// A request resolves to the cells it touches; only those shards are resumed
// from their last unaffected checkpoint. Untouched shards are copied into
// the new generation byte for byte. The cost ledger compares the optimizer
// steps actually executed against an analytic full retrain of every live
// shard on the retained data.

#ifndef SISA_UNLEARN_H_
#define SISA_UNLEARN_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sisa/kv.h"
#include "sisa/run.h"
#include "sisa/sharding.h"

namespace sisa {

struct CostLedger {
  int shards_retrained = 0;
  int stages_executed = 0;
  uint64_t optimizer_steps_executed = 0;
  uint64_t optimizer_steps_full_retrain_baseline = 0;

  // 1 - executed / baseline, clamped to [0, 1]; 0 when the baseline is 0.
  double savings_ratio() const;

  void WriteTo(KeyValueFile& kv, const std::string& prefix = "ledger.") const;
};

struct UnlearnOutcome {
  int generation = 0;
  int parent_generation = 0;
  UnlearnRequest request = UnlearnRequest::ForPoints({0});
  std::map<int, int> affected;
  std::vector<int> dropped_shards;
  // Refreshed models of the affected shards that are still live.
  std::vector<std::pair<int, ModelParams>> refreshed;
  CostLedger ledger;

  // Machine-parseable report (key=value).
  KeyValueFile ToReport() const;
};

// Runs one unlearning transaction and commits a new generation.
// Throws NotFoundError for unknown or already-erased ids and
// InvalidArgumentError when the request would empty every shard.
UnlearnOutcome ExecuteUnlearn(Run& run, const UnlearnRequest& request);

struct ErasureCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ErasureReport {
  int before_generation = 0;
  int after_generation = 0;
  std::vector<ErasureCheck> checks;

  bool passed() const;
  KeyValueFile ToReport() const;
};

// Checks that `after` is a correct unlearning of `before`:
//   no_removed_points  no erased id appears in any stage of `after`
//   oracle_retrain     every affected live shard equals a from-scratch
//                      retrain on its retained data, bitwise
//   unaffected_intact  every other shard's files are byte-identical
// Throws IntegrityError when `after` was not produced from `before`.
ErasureReport VerifyErasure(const Run& run, int before_generation,
                            int after_generation);

}  // namespace sisa

#endif  // SISA_UNLEARN_H_
