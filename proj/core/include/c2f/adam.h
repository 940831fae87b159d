// Copyright 2026 The C2F Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef C2F_ADAM_H_
#define C2F_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "c2f/autodiff.h"

namespace c2f {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment buffers, one per parameter, in parameter order.
struct AdamState {
  int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

// One bias-corrected adaptive-moment update. Zero-initializes `state` on the
// first call. Throws NumericError if any updated value is non-finite; the
// parameters are left untouched in that case.
void AdamStep(std::span<Parameter* const> params, AdamState& state, double lr,
              const AdamConfig& config = {});

}  // namespace c2f

#endif  // C2F_ADAM_H_
