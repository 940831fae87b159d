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

#ifndef C2F_ENTROPY_H_
#define C2F_ENTROPY_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "c2f/autodiff.h"
#include "c2f/random.h"
#include "c2f/range_coder.h"

namespace c2f {

enum class QuantizerMode { kTrainNoise, kInferenceRound };

// Scale bounds shared by the predictor heads and the Z prior.
inline constexpr float kSigmaMin = 0.01f;
inline constexpr float kSigmaMax = 256.0f;
// Likelihoods are floored here before taking logs.
inline constexpr double kLikelihoodFloor = 0x1.0p-32;
// Alphabet of every coded latent; values outside are escape-coded.
inline constexpr int32_t kSymbolMin = -127;
inline constexpr int32_t kSymbolMax = 128;

// Round half away from zero.
float RoundHalfAway(float v);
Tensor RoundHalfAway(const Tensor& t);
// i.i.d. Uniform(-0.5, 0.5) noise drawn from `rng`.
Tensor UniformNoise(const Shape& shape, Rng& rng);

// kTrainNoise: x + u with u from `rng` (gradient passes straight through the
// addition). kInferenceRound: rounded constant, no gradient.
Var Quantize(Var x, QuantizerMode mode, Rng* rng);

// Standard normal CDF and the probability mass of the integer bin centred on
// x under N(mu, sigma^2), computed in double precision from the upper or
// lower tail, whichever is more accurate.
double NormalCdf(double t);
double DiscretizedGaussianMass(double x, double mu, double sigma);

// Per-element discretized Gaussian likelihood, floored at kLikelihoodFloor.
// Differentiable in x, mu and sigma.
Var GaussianLikelihood(Var x, Var mu, Var sigma);
// Zero-mean variant with one sigma per channel; sigma is (1,1,1,c).
Var ZLikelihood(Var z, Var sigma);

// -sum(log2 q) as a scalar.
Var RateBits(Var likelihoods);
double RateBits(const Tensor& likelihoods);

// Integer table for one symbol: discretized N(mu, sigma^2) over
// [smin, smax], every bin at least 1/65536, tail mass outside the range in
// a trailing escape bin, residual apportioned by largest remainder so the
// total is exactly 65536.
CdfTable BuildCdfTable(double mu, double sigma, int32_t smin = kSymbolMin,
                       int32_t smax = kSymbolMax);
// In-place variant that reuses `table`'s storage.
void BuildCdfTable(double mu, double sigma, int32_t smin, int32_t smax,
                   CdfTable& table);

// Produces the table of the element at raster index `i`.
using TableFn = std::function<void(size_t i, CdfTable& table)>;
TableFn GaussianTableFn(const Tensor& mu, const Tensor& sigma);
// Zero-mean latent of `shape` with a (1,1,1,c) per-channel sigma.
TableFn ZTableFn(const Shape& shape, const Tensor& sigma);

struct CodedStream {
  std::vector<uint8_t> bytes;
  // Cross entropy of the symbols under the integer tables, in bits.
  double ideal_bits = 0.0;
};

// Range-codes a latent element by element without materializing all
// tables.
CodedStream EncodeLatent(std::span<const int32_t> symbols,
                         const TableFn& tables);
std::vector<int32_t> DecodeLatent(std::span<const uint8_t> bytes, size_t n,
                                  const TableFn& tables);

std::vector<int32_t> ToSymbols(const Tensor& rounded);
Tensor FromSymbols(const Shape& shape, const std::vector<int32_t>& symbols);

}  // namespace c2f

#endif  // C2F_ENTROPY_H_
