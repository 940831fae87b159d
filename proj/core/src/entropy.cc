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

#include "c2f/entropy.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

#include "c2f/errors.h"

namespace c2f {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Upper tail Q(t) = 1 - Phi(t).
double UpperTail(double t) { return 0.5 * std::erfc(t * kInvSqrt2); }

double NormalPdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

// Mass of N(0,1) on [lo, hi], taken from whichever tail keeps precision.
double IntervalMass(double lo, double hi) {
  if (lo > 0.0) return UpperTail(lo) - UpperTail(hi);
  if (hi < 0.0) return UpperTail(-hi) - UpperTail(-lo);
  return 1.0 - UpperTail(hi) - UpperTail(-lo);
}

void CheckSigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw NumericError("likelihood scale must be positive and finite, got " +
                       std::to_string(sigma));
  }
}

}  // namespace

float RoundHalfAway(float v) { return std::round(v); }

Tensor RoundHalfAway(const Tensor& t) {
  Tensor out(t.shape());
  for (int64_t i = 0; i < t.size(); ++i) out[i] = std::round(t[i]);
  return out;
}

Tensor UniformNoise(const Shape& shape, Rng& rng) {
  Tensor out(shape);
  for (int64_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(rng.Uniform() - 0.5);
  }
  return out;
}

Var Quantize(Var x, QuantizerMode mode, Rng* rng) {
  if (mode == QuantizerMode::kInferenceRound) {
    return x.tape().Constant(RoundHalfAway(x.value()));
  }
  if (rng == nullptr) throw ContractError("noise quantizer needs an rng");
  return Add(x, x.tape().Constant(UniformNoise(x.shape(), *rng)));
}

double NormalCdf(double t) { return 1.0 - UpperTail(t); }

double DiscretizedGaussianMass(double x, double mu, double sigma) {
  CheckSigma(sigma);
  const double d = x - mu;
  return IntervalMass((d - 0.5) / sigma, (d + 0.5) / sigma);
}

Var GaussianLikelihood(Var x, Var mu, Var sigma) {
  CheckSameShape(x.shape(), mu.shape(), "gaussian_likelihood(mu)");
  CheckSameShape(x.shape(), sigma.shape(), "gaussian_likelihood(sigma)");
  const Tensor& xv = x.value();
  const Tensor& mv = mu.value();
  const Tensor& sv = sigma.value();
  Tensor out(x.shape());
  for (int64_t i = 0; i < xv.size(); ++i) {
    const double q = DiscretizedGaussianMass(xv[i], mv[i], sv[i]);
    out[i] = static_cast<float>(std::max(q, kLikelihoodFloor));
  }
  return x.tape().Record(
      "gaussian_likelihood", std::move(out), {x, mu, sigma},
      [](BackwardContext& c) {
        const Tensor& xv = c.input(0);
        const Tensor& mv = c.input(1);
        const Tensor& sv = c.input(2);
        const Tensor& g = c.output_grad();
        Tensor* gx = c.wants(0) ? &c.grad(0) : nullptr;
        Tensor* gm = c.wants(1) ? &c.grad(1) : nullptr;
        Tensor* gs = c.wants(2) ? &c.grad(2) : nullptr;
        for (int64_t i = 0; i < xv.size(); ++i) {
          const double s = sv[i];
          const double d = static_cast<double>(xv[i]) - mv[i];
          const double hi = (d + 0.5) / s;
          const double lo = (d - 0.5) / s;
          if (IntervalMass(lo, hi) <= kLikelihoodFloor) continue;
          const double ph = NormalPdf(hi);
          const double pl = NormalPdf(lo);
          const double dx = (ph - pl) / s;
          if (gx) (*gx)[i] += static_cast<float>(g[i] * dx);
          if (gm) (*gm)[i] -= static_cast<float>(g[i] * dx);
          if (gs) (*gs)[i] -= static_cast<float>(g[i] * (hi * ph - lo * pl) / s);
        }
      });
}

Var ZLikelihood(Var z, Var sigma) {
  const Shape& zs = z.shape();
  const int64_t c = zs.c;
  if (sigma.value().size() != c || sigma.shape().c != c) {
    throw ContractError("z_likelihood: sigma " + sigma.shape().ToString() +
                        " is not per-channel for " + zs.ToString());
  }
  const Tensor& zv = z.value();
  const Tensor& sv = sigma.value();
  Tensor out(zs);
  for (int64_t i = 0; i < zv.size(); ++i) {
    const double q = DiscretizedGaussianMass(zv[i], 0.0, sv[i % c]);
    out[i] = static_cast<float>(std::max(q, kLikelihoodFloor));
  }
  return z.tape().Record(
      "z_likelihood", std::move(out), {z, sigma}, [c](BackwardContext& ctx) {
        const Tensor& zv = ctx.input(0);
        const Tensor& sv = ctx.input(1);
        const Tensor& g = ctx.output_grad();
        Tensor* gz = ctx.wants(0) ? &ctx.grad(0) : nullptr;
        std::vector<double> gsig(static_cast<size_t>(c), 0.0);
        for (int64_t i = 0; i < zv.size(); ++i) {
          const double s = sv[i % c];
          const double hi = (zv[i] + 0.5) / s;
          const double lo = (zv[i] - 0.5) / s;
          if (IntervalMass(lo, hi) <= kLikelihoodFloor) continue;
          const double ph = NormalPdf(hi);
          const double pl = NormalPdf(lo);
          if (gz) (*gz)[i] += static_cast<float>(g[i] * (ph - pl) / s);
          gsig[i % c] -= g[i] * (hi * ph - lo * pl) / s;
        }
        if (ctx.wants(1)) {
          Tensor& gs = ctx.grad(1);
          for (int64_t ch = 0; ch < c; ++ch) gs[ch] += static_cast<float>(gsig[ch]);
        }
      });
}

double RateBits(const Tensor& likelihoods) {
  double bits = 0.0;
  for (float q : likelihoods.values()) {
    bits -= std::log2(std::max(static_cast<double>(q), kLikelihoodFloor));
  }
  return bits;
}

Var RateBits(Var likelihoods) {
  for (float q : likelihoods.value().values()) {
    if (!(q > 0.0f) || q > 1.0f) {
      throw NumericError("rate_bits: likelihood " + std::to_string(q) +
                         " outside (0, 1]");
    }
  }
  Tensor out(Shape{1, 1, 1, 1});
  out[0] = static_cast<float>(RateBits(likelihoods.value()));
  return likelihoods.tape().Record(
      "rate_bits", std::move(out), {likelihoods}, [](BackwardContext& c) {
        const Tensor& q = c.input(0);
        const double g = c.output_grad()[0];
        Tensor& gq = c.grad(0);
        constexpr double kInvLn2 = 1.44269504088896340736;
        for (int64_t i = 0; i < q.size(); ++i) {
          gq[i] -= static_cast<float>(g * kInvLn2 / q[i]);
        }
      });
}

void BuildCdfTable(double mu, double sigma, int32_t smin, int32_t smax,
                   CdfTable& table) {
  CheckSigma(sigma);
  if (smin >= smax) throw ContractError("cdf alphabet needs smin < smax");
  const int32_t num_symbols = smax - smin + 1;
  const int32_t escape = num_symbols;
  const int32_t bins = num_symbols + 1;

  // Symbols farther than this from mu carry < 1e-30 mass; they keep the
  // floor frequency only.
  const double reach = 12.0 * sigma + 2.0;
  const int32_t lo = static_cast<int32_t>(
      std::clamp(std::floor(mu - reach), double(smin), double(smax) + 1));
  const int32_t hi = static_cast<int32_t>(
      std::clamp(std::ceil(mu + reach), double(smin) - 1, double(smax)));

  thread_local std::vector<double> share;
  thread_local std::vector<int32_t> candidates;
  candidates.clear();
  share.assign(static_cast<size_t>(bins), 0.0);
  double total = 0.0;
  for (int32_t s = lo; s <= hi; ++s) {
    const double p = DiscretizedGaussianMass(s, mu, sigma);
    share[s - smin] = p;
    total += p;
    candidates.push_back(s - smin);
  }
  const double tail = IntervalMass(-INFINITY, (smin - 0.5 - mu) / sigma) +
                      IntervalMass((smax + 0.5 - mu) / sigma, INFINITY);
  share[escape] = tail;
  total += tail;
  candidates.push_back(escape);
  if (!(total > 0.0)) {
    // Fully underflowed: mu is astronomically far outside the alphabet.
    share[escape] = total = 1.0;
  }

  const double budget = static_cast<double>(kProbTotal) - bins;
  table.smin = smin;
  table.escape = true;
  table.cdf.assign(static_cast<size_t>(bins) + 1, 0);
  thread_local std::vector<uint32_t> freq;
  freq.assign(static_cast<size_t>(bins), 1);
  int64_t assigned = 0;
  for (int32_t idx : candidates) {
    const double x = share[idx] / total * budget;
    const double whole = std::floor(x);
    freq[idx] += static_cast<uint32_t>(whole);
    share[idx] = x - whole;
    assigned += static_cast<int64_t>(whole);
  }
  int64_t leftover = static_cast<int64_t>(budget) - assigned;
  std::sort(candidates.begin(), candidates.end(), [&](int32_t a, int32_t b) {
    if (share[a] != share[b]) return share[a] > share[b];
    return a < b;
  });
  for (size_t k = 0; leftover > 0; k = (k + 1) % candidates.size()) {
    ++freq[candidates[k]];
    --leftover;
  }
  for (int32_t i = 0; i < bins; ++i) table.cdf[i + 1] = table.cdf[i] + freq[i];
}

CdfTable BuildCdfTable(double mu, double sigma, int32_t smin, int32_t smax) {
  CdfTable t;
  BuildCdfTable(mu, sigma, smin, smax, t);
  return t;
}

TableFn GaussianTableFn(const Tensor& mu, const Tensor& sigma) {
  CheckSameShape(mu.shape(), sigma.shape(), "gaussian tables");
  return [&mu, &sigma](size_t i, CdfTable& table) {
    BuildCdfTable(mu[static_cast<int64_t>(i)], sigma[static_cast<int64_t>(i)],
                  kSymbolMin, kSymbolMax, table);
  };
}

TableFn ZTableFn(const Shape& shape, const Tensor& sigma) {
  const int64_t c = shape.c;
  if (sigma.size() != c) {
    throw ContractError("z tables: sigma has " + std::to_string(sigma.size()) +
                        " entries for " + std::to_string(c) + " channels");
  }
  auto per_channel = std::make_shared<std::vector<CdfTable>>();
  for (int64_t ch = 0; ch < c; ++ch) {
    per_channel->push_back(BuildCdfTable(0.0, sigma[ch]));
  }
  return [per_channel, c](size_t i, CdfTable& table) {
    table = (*per_channel)[i % static_cast<size_t>(c)];
  };
}

CodedStream EncodeLatent(std::span<const int32_t> symbols,
                         const TableFn& tables) {
  CodedStream out;
  RangeEncoder enc;
  CdfTable table;
  for (size_t i = 0; i < symbols.size(); ++i) {
    tables(i, table);
    enc.Encode(symbols[i], table);
    out.ideal_bits += table.CostBits(symbols[i]);
  }
  out.bytes = enc.Finish();
  return out;
}

std::vector<int32_t> DecodeLatent(std::span<const uint8_t> bytes, size_t n,
                                  const TableFn& tables) {
  RangeDecoder dec(bytes);
  std::vector<int32_t> out(n);
  CdfTable table;
  for (size_t i = 0; i < n; ++i) {
    tables(i, table);
    out[i] = dec.Decode(table);
  }
  dec.CheckFullyConsumed();
  return out;
}

std::vector<int32_t> ToSymbols(const Tensor& rounded) {
  std::vector<int32_t> out(static_cast<size_t>(rounded.size()));
  for (int64_t i = 0; i < rounded.size(); ++i) {
    const float v = rounded[i];
    if (v != std::round(v) || std::fabs(v) > 2.0e9f) {
      throw ContractError("latent value " + std::to_string(v) +
                          " is not a representable integer");
    }
    out[static_cast<size_t>(i)] = static_cast<int32_t>(v);
  }
  return out;
}

Tensor FromSymbols(const Shape& shape, const std::vector<int32_t>& symbols) {
  if (static_cast<int64_t>(symbols.size()) != shape.size()) {
    throw ContractError("symbol count does not match latent shape " +
                        shape.ToString());
  }
  Tensor out(shape);
  for (int64_t i = 0; i < shape.size(); ++i) {
    out[i] = static_cast<float>(symbols[static_cast<size_t>(i)]);
  }
  return out;
}

}  // namespace c2f
