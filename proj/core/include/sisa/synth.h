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

// Seeded synthetic datasets.
//
// Classification: C isotropic Gaussian blobs (sigma = 1). Class c is
// centered at separation * e_c when C <= d, and at separation times a
// seeded random unit vector otherwise. Point i has label i mod C.
// Regression: x ~ N(0, I), target = w.x + noise_std * N(0, 1), with
// w ~ N(0, I/d) drawn from the seed.
// Users own contiguous blocks of points: with n points and U users, user u
// gets points [u*n/U, (u+1)*n/U). Ids are `u000`, `u001`, ...

#ifndef SISA_SYNTH_H_
#define SISA_SYNTH_H_

#include <cstdint>
#include <string_view>

#include "sisa/dataset.h"
#include "sisa/kv.h"

namespace sisa {

struct SynthSpec {
  Task task = Task::Classification(6);
  int num_points = 600;
  int num_users = 40;
  int feature_dim = 16;
  double separation = 4.0;
  double noise_std = 0.1;
  uint64_t seed = 1;

  // Parses `task=cls,n=600,users=40,d=16,C=6,sep=4,noise=0.1,seed=1`.
  // Missing keys keep their defaults.
  static SynthSpec Parse(std::string_view text);
  std::string ToString() const;
};

// Throws InvalidArgumentError for non-positive sizes, users > points, or
// C < 2.
Dataset GenerateSynthetic(const SynthSpec& spec);

}  // namespace sisa

#endif  // SISA_SYNTH_H_
