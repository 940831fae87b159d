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

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "c2f/autodiff.h"
#include "c2f/errors.h"

namespace c2f {
namespace {

using RowMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

// norm(p, i) = beta_i + sum_j gamma_ij x(p, j)^2
RowMatrix Norms(const Tensor& x, const Tensor& beta, const Tensor& gamma) {
  const int64_t c = x.shape().c;
  const int64_t pixels = x.shape().pixels();
  RowMatrix sq(pixels, c);
  for (int64_t i = 0; i < x.size(); ++i) sq.data()[i] = x[i] * x[i];
  RowMatrix norm(pixels, c);
  norm.noalias() = sq * ConstMap(gamma.data(), c, c).transpose();
  for (int64_t p = 0; p < pixels; ++p) {
    for (int64_t ch = 0; ch < c; ++ch) norm(p, ch) += beta[ch];
  }
  return norm;
}

}  // namespace

Var Gdn(Var input, Var beta, Var gamma, bool inverse) {
  const Shape& in = input.shape();
  const int64_t c = in.c;
  if (beta.value().size() != c || beta.shape().c != c) {
    throw ContractError("gdn: beta " + beta.shape().ToString() +
                        " does not match channels of " + in.ToString());
  }
  if (gamma.shape().w != c || gamma.shape().c != c ||
      gamma.value().size() != c * c) {
    throw ContractError("gdn: gamma " + gamma.shape().ToString() +
                        " is not (1,1," + std::to_string(c) + "," +
                        std::to_string(c) + ")");
  }
  const RowMatrix norm = Norms(input.value(), beta.value(), gamma.value());
  Tensor out(in);
  const Tensor& x = input.value();
  for (int64_t i = 0; i < x.size(); ++i) {
    const float n = norm.data()[i];
    if (!(n > 0.0f)) {
      throw NumericError("gdn: non-positive normalizer " + std::to_string(n));
    }
    const float r = std::sqrt(n);
    out[i] = inverse ? x[i] * r : x[i] / r;
  }
  return input.tape().Record(
      inverse ? "igdn" : "gdn", std::move(out), {input, beta, gamma},
      [inverse, c](BackwardContext& ctx) {
        const Tensor& x = ctx.input(0);
        const Tensor& gm = ctx.input(2);
        const Tensor& g = ctx.output_grad();
        const int64_t pixels = x.shape().pixels();
        const RowMatrix norm = Norms(x, ctx.input(1), gm);
        // t = dL/dnorm
        RowMatrix t(pixels, c);
        for (int64_t i = 0; i < x.size(); ++i) {
          const float n = norm.data()[i];
          const float r = std::sqrt(n);
          t.data()[i] = inverse ? 0.5f * g[i] * x[i] / r
                                : -0.5f * g[i] * x[i] / (n * r);
        }
        if (ctx.wants(0)) {
          RowMatrix tg(pixels, c);
          tg.noalias() = t * ConstMap(gm.data(), c, c);
          Tensor& gx = ctx.grad(0);
          for (int64_t i = 0; i < x.size(); ++i) {
            const float r = std::sqrt(norm.data()[i]);
            gx[i] += (inverse ? g[i] * r : g[i] / r) +
                     2.0f * x[i] * tg.data()[i];
          }
        }
        if (ctx.wants(1)) {
          Tensor& gb = ctx.grad(1);
          for (int64_t ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (int64_t p = 0; p < pixels; ++p) acc += t(p, ch);
            gb[ch] += static_cast<float>(acc);
          }
        }
        if (ctx.wants(2)) {
          RowMatrix sq(pixels, c);
          for (int64_t i = 0; i < x.size(); ++i) sq.data()[i] = x[i] * x[i];
          MutMap(ctx.grad(2).data(), c, c).noalias() += t.transpose() * sq;
        }
      });
}

namespace {

// Channel index of input pixel (dy, dx, ch) inside a block of `block`^2
// pixels folded into depth.
inline int64_t DepthIndex(int64_t dy, int64_t dx, int64_t ch, int64_t block,
                          int64_t c) {
  return (dy * block + dx) * c + ch;
}

// Copies between the spatial layout `wide` (b, h, w, c) and the folded
// layout (b, h/block, w/block, block*block*c). Direction picks the copy.
void Fold(const Shape& wide, int64_t block, const float* src, float* dst,
          bool to_depth, bool accumulate) {
  const int64_t oh = wide.h / block;
  const int64_t ow = wide.w / block;
  const int64_t oc = wide.c * block * block;
  for (int64_t b = 0; b < wide.b; ++b) {
    for (int64_t y = 0; y < wide.h; ++y) {
      for (int64_t x = 0; x < wide.w; ++x) {
        const int64_t wide_off = ((b * wide.h + y) * wide.w + x) * wide.c;
        const int64_t deep_off =
            ((b * oh + y / block) * ow + x / block) * oc +
            DepthIndex(y % block, x % block, 0, block, wide.c);
        const float* s = src + (to_depth ? wide_off : deep_off);
        float* d = dst + (to_depth ? deep_off : wide_off);
        for (int64_t ch = 0; ch < wide.c; ++ch) {
          if (accumulate) {
            d[ch] += s[ch];
          } else {
            d[ch] = s[ch];
          }
        }
      }
    }
  }
}

}  // namespace

Var SpaceToDepth(Var input, int block) {
  const Shape& in = input.shape();
  if (block < 1 || in.h % block != 0 || in.w % block != 0) {
    throw ContractError("space_to_depth: " + in.ToString() +
                        " not divisible by block " + std::to_string(block));
  }
  Tensor out(Shape{in.b, in.h / block, in.w / block, in.c * block * block});
  Fold(in, block, input.value().data(), out.data(), true, false);
  return input.tape().Record(
      "space_to_depth", std::move(out), {input},
      [in, block](BackwardContext& ctx) {
        Fold(in, block, ctx.output_grad().data(), ctx.grad(0).data(), false,
             true);
      });
}

Var DepthToSpace(Var input, int block) {
  const Shape& in = input.shape();
  if (block < 1 || in.c % (block * block) != 0) {
    throw ContractError("depth_to_space: channels of " + in.ToString() +
                        " not divisible by " + std::to_string(block * block));
  }
  const Shape wide{in.b, in.h * block, in.w * block, in.c / (block * block)};
  Tensor out(wide);
  Fold(wide, block, input.value().data(), out.data(), false, false);
  return input.tape().Record(
      "depth_to_space", std::move(out), {input},
      [wide, block](BackwardContext& ctx) {
        Fold(wide, block, ctx.output_grad().data(), ctx.grad(0).data(), true,
             true);
      });
}

}  // namespace c2f
