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

#include "c2f/adam.h"

#include <cmath>
#include <string>

#include "c2f/errors.h"

namespace c2f {

void AdamStep(std::span<Parameter* const> params, AdamState& state, double lr,
              const AdamConfig& config) {
  if (state.m.size() != params.size()) {
    state.step = 0;
    state.m.clear();
    state.v.clear();
    for (const Parameter* p : params) {
      state.m.emplace_back(p->value.shape());
      state.v.emplace_back(p->value.shape());
    }
  }
  const int64_t t = state.step + 1;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));

  // Compute everything first so a non-finite update leaves params untouched.
  std::vector<Tensor> next_m(params.size());
  std::vector<Tensor> next_v(params.size());
  std::vector<Tensor> next_p(params.size());
  for (size_t k = 0; k < params.size(); ++k) {
    const Parameter& p = *params[k];
    if (!(p.grad.shape() == p.value.shape())) {
      throw ContractError("adam: parameter '" + p.name + "' has no gradient");
    }
    next_m[k] = Tensor(p.value.shape());
    next_v[k] = Tensor(p.value.shape());
    next_p[k] = Tensor(p.value.shape());
    for (int64_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      const double m = config.beta1 * state.m[k][i] + (1.0 - config.beta1) * g;
      const double v =
          config.beta2 * state.v[k][i] + (1.0 - config.beta2) * g * g;
      const double update =
          lr * (m / c1) / (std::sqrt(v / c2) + config.epsilon);
      next_m[k][i] = static_cast<float>(m);
      next_v[k][i] = static_cast<float>(v);
      next_p[k][i] = static_cast<float>(p.value[i] - update);
    }
    if (!next_p[k].AllFinite() || !next_v[k].AllFinite()) {
      throw NumericError("adam: non-finite update for parameter '" + p.name +
                         "'");
    }
  }
  for (size_t k = 0; k < params.size(); ++k) {
    params[k]->value = std::move(next_p[k]);
    state.m[k] = std::move(next_m[k]);
    state.v[k] = std::move(next_v[k]);
  }
  state.step = t;
}

}  // namespace c2f
