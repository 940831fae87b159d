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

#include <algorithm>
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

// Geometry of a forward convolution from an (in_h, in_w, cin) image to an
// (out_h, out_w, cout) image. Deconvolution reuses it with the roles of the
// two images swapped.
struct Geometry {
  int64_t in_h, in_w, out_h, out_w;
  int64_t kh, kw, stride;
  int64_t pad_top, pad_left;
  int64_t cin, cout;

  int64_t patch() const { return kh * kw * cin; }
  bool pointwise() const { return kh == 1 && kw == 1 && stride == 1; }
};

int64_t SamePadTotal(int64_t in, int64_t out, int64_t k, int64_t s) {
  return std::max<int64_t>((out - 1) * s + k - in, 0);
}

Geometry MakeGeometry(int64_t in_h, int64_t in_w, int64_t out_h, int64_t out_w,
                      int64_t kh, int64_t kw, int64_t stride, int64_t cin,
                      int64_t cout) {
  Geometry g{in_h, in_w, out_h, out_w, kh, kw, stride, 0, 0, cin, cout};
  g.pad_top = SamePadTotal(in_h, out_h, kh, stride) / 2;
  g.pad_left = SamePadTotal(in_w, out_w, kw, stride) / 2;
  return g;
}

void CheckStride(int stride, const char* op) {
  if (stride != 1 && stride != 2) {
    throw ContractError(std::string(op) + ": stride must be 1 or 2, got " +
                        std::to_string(stride));
  }
}

// col is (out_h * out_w, kh * kw * cin).
void Im2Col(const float* image, const Geometry& g, float* col) {
  const int64_t patch = g.patch();
  for (int64_t oy = 0; oy < g.out_h; ++oy) {
    for (int64_t ox = 0; ox < g.out_w; ++ox) {
      float* row = col + (oy * g.out_w + ox) * patch;
      for (int64_t ky = 0; ky < g.kh; ++ky) {
        const int64_t iy = oy * g.stride - g.pad_top + ky;
        for (int64_t kx = 0; kx < g.kw; ++kx) {
          const int64_t ix = ox * g.stride - g.pad_left + kx;
          float* dst = row + (ky * g.kw + kx) * g.cin;
          if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) {
            std::fill_n(dst, g.cin, 0.0f);
          } else {
            std::copy_n(image + (iy * g.in_w + ix) * g.cin, g.cin, dst);
          }
        }
      }
    }
  }
}

// Adjoint of Im2Col: scatters-and-adds col rows back into image.
void Col2Im(const float* col, const Geometry& g, float* image) {
  const int64_t patch = g.patch();
  for (int64_t oy = 0; oy < g.out_h; ++oy) {
    for (int64_t ox = 0; ox < g.out_w; ++ox) {
      const float* row = col + (oy * g.out_w + ox) * patch;
      for (int64_t ky = 0; ky < g.kh; ++ky) {
        const int64_t iy = oy * g.stride - g.pad_top + ky;
        if (iy < 0 || iy >= g.in_h) continue;
        for (int64_t kx = 0; kx < g.kw; ++kx) {
          const int64_t ix = ox * g.stride - g.pad_left + kx;
          if (ix < 0 || ix >= g.in_w) continue;
          const float* src = row + (ky * g.kw + kx) * g.cin;
          float* dst = image + (iy * g.in_w + ix) * g.cin;
          for (int64_t c = 0; c < g.cin; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

}  // namespace

int64_t ConvOutputSize(int64_t in, int64_t kernel, int stride,
                       Padding padding) {
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  if (in < kernel) return 0;
  return (in - kernel) / stride + 1;
}

int64_t DeconvOutputSize(int64_t in, int64_t kernel, int stride,
                         Padding padding) {
  if (padding == Padding::kSame) return in * stride;
  return (in - 1) * stride + kernel;
}

Var Conv2D(Var input, Var kernel, int stride, Padding padding) {
  CheckStride(stride, "conv2d");
  const Shape& in = input.shape();
  const Shape& ks = kernel.shape();
  if (in.c != ks.w) {
    throw ContractError("conv2d: input channels " + std::to_string(in.c) +
                        " != kernel cin " + std::to_string(ks.w) +
                        " (kernel " + ks.ToString() + ")");
  }
  const int64_t out_h = ConvOutputSize(in.h, ks.b, stride, padding);
  const int64_t out_w = ConvOutputSize(in.w, ks.h, stride, padding);
  if (out_h <= 0 || out_w <= 0) {
    throw ContractError("conv2d: input " + in.ToString() +
                        " smaller than kernel " + ks.ToString());
  }
  const Geometry g =
      MakeGeometry(in.h, in.w, out_h, out_w, ks.b, ks.h, stride, in.c, ks.c);
  Tensor out(Shape{in.b, out_h, out_w, ks.c});
  const int64_t in_stride = in.h * in.w * in.c;
  const int64_t out_rows = out_h * out_w;
  const int64_t out_stride = out_rows * g.cout;
  ConstMap k(kernel.value().data(), g.patch(), g.cout);
  RowMatrix col;
  for (int64_t b = 0; b < in.b; ++b) {
    const float* x = input.value().data() + b * in_stride;
    MutMap y(out.data() + b * out_stride, out_rows, g.cout);
    if (g.pointwise()) {
      y.noalias() = ConstMap(x, out_rows, g.cin) * k;
    } else {
      col.resize(out_rows, g.patch());
      Im2Col(x, g, col.data());
      y.noalias() = col * k;
    }
  }
  return input.tape().Record(
      "conv2d", std::move(out), {input, kernel},
      [g, in_stride, out_stride, out_rows](BackwardContext& c) {
        const Tensor& x = c.input(0);
        const Tensor& gy = c.output_grad();
        ConstMap k(c.input(1).data(), g.patch(), g.cout);
        const int64_t batch = x.shape().b;
        RowMatrix col;
        RowMatrix gcol;
        for (int64_t b = 0; b < batch; ++b) {
          ConstMap gyb(gy.data() + b * out_stride, out_rows, g.cout);
          const float* xb = x.data() + b * in_stride;
          if (c.wants(1)) {
            MutMap gk(c.grad(1).data(), g.patch(), g.cout);
            if (g.pointwise()) {
              gk.noalias() += ConstMap(xb, out_rows, g.cin).transpose() * gyb;
            } else {
              col.resize(out_rows, g.patch());
              Im2Col(xb, g, col.data());
              gk.noalias() += col.transpose() * gyb;
            }
          }
          if (c.wants(0)) {
            float* gx = c.grad(0).data() + b * in_stride;
            if (g.pointwise()) {
              MutMap(gx, out_rows, g.cin).noalias() += gyb * k.transpose();
            } else {
              gcol.resize(out_rows, g.patch());
              gcol.noalias() = gyb * k.transpose();
              Col2Im(gcol.data(), g, gx);
            }
          }
        }
      });
}

Var Deconv2D(Var input, Var kernel, int stride, Padding padding) {
  CheckStride(stride, "deconv2d");
  const Shape& in = input.shape();
  const Shape& ks = kernel.shape();
  if (in.c != ks.c) {
    throw ContractError("deconv2d: input channels " + std::to_string(in.c) +
                        " != kernel cin " + std::to_string(ks.c) +
                        " (kernel " + ks.ToString() + ")");
  }
  const int64_t out_h = DeconvOutputSize(in.h, ks.b, stride, padding);
  const int64_t out_w = DeconvOutputSize(in.w, ks.h, stride, padding);
  // The forward conv this op is the adjoint of maps (out_h, out_w, ks.w)
  // to (in.h, in.w, ks.c).
  const Geometry g =
      MakeGeometry(out_h, out_w, in.h, in.w, ks.b, ks.h, stride, ks.w, ks.c);
  Tensor out(Shape{in.b, out_h, out_w, ks.w});
  const int64_t rows = in.h * in.w;
  const int64_t in_stride = rows * in.c;
  const int64_t out_stride = out_h * out_w * ks.w;
  ConstMap k(kernel.value().data(), g.patch(), g.cout);
  RowMatrix dcol;
  for (int64_t b = 0; b < in.b; ++b) {
    ConstMap x(input.value().data() + b * in_stride, rows, g.cout);
    float* y = out.data() + b * out_stride;
    if (g.pointwise()) {
      MutMap(y, rows, g.cin).noalias() = x * k.transpose();
    } else {
      dcol.resize(rows, g.patch());
      dcol.noalias() = x * k.transpose();
      Col2Im(dcol.data(), g, y);
    }
  }
  return input.tape().Record(
      "deconv2d", std::move(out), {input, kernel},
      [g, rows, in_stride, out_stride](BackwardContext& c) {
        const Tensor& x = c.input(0);
        const Tensor& gy = c.output_grad();
        ConstMap k(c.input(1).data(), g.patch(), g.cout);
        const int64_t batch = x.shape().b;
        RowMatrix col;
        for (int64_t b = 0; b < batch; ++b) {
          const float* gyb = gy.data() + b * out_stride;
          ConstMap xb(x.data() + b * in_stride, rows, g.cout);
          const float* colp = gyb;
          if (!g.pointwise()) {
            col.resize(rows, g.patch());
            Im2Col(gyb, g, col.data());
            colp = col.data();
          }
          ConstMap cm(colp, rows, g.patch());
          if (c.wants(0)) {
            MutMap(c.grad(0).data() + b * in_stride, rows, g.cout).noalias() +=
                cm * k;
          }
          if (c.wants(1)) {
            MutMap(c.grad(1).data(), g.patch(), g.cout).noalias() +=
                cm.transpose() * xb;
          }
        }
      });
}

Var BiasAdd(Var input, Var bias) {
  const Shape& in = input.shape();
  const Shape& bs = bias.shape();
  if (bs.size() != in.c || bs.c != in.c) {
    throw ContractError("bias_add: bias " + bs.ToString() +
                        " does not match channels of " + in.ToString());
  }
  Tensor out(in);
  const Tensor& x = input.value();
  const Tensor& bv = bias.value();
  const int64_t c = in.c;
  for (int64_t px = 0; px < in.pixels(); ++px) {
    for (int64_t ch = 0; ch < c; ++ch) out[px * c + ch] = x[px * c + ch] + bv[ch];
  }
  return input.tape().Record(
      "bias_add", std::move(out), {input, bias}, [c](BackwardContext& ctx) {
        const Tensor& g = ctx.output_grad();
        const int64_t pixels = g.size() / c;
        if (ctx.wants(0)) {
          Tensor& gx = ctx.grad(0);
          for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
        if (ctx.wants(1)) {
          Tensor& gb = ctx.grad(1);
          for (int64_t ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (int64_t px = 0; px < pixels; ++px) acc += g[px * c + ch];
            gb[ch] += static_cast<float>(acc);
          }
        }
      });
}

}  // namespace c2f
