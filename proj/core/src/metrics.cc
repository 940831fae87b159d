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

#include "c2f/metrics.h"

#include <cmath>
#include <string>
#include <vector>

#include "c2f/errors.h"

namespace c2f {
namespace {

using C = MsSsimConstants;

std::array<double, C::kFilterSize> GaussianWindow() {
  std::array<double, C::kFilterSize> g{};
  double total = 0.0;
  for (int i = 0; i < C::kFilterSize; ++i) {
    const double d = i - (C::kFilterSize - 1) / 2.0;
    g[i] = std::exp(-d * d / (2.0 * C::kFilterSigma * C::kFilterSigma));
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

std::vector<double> ScaleWeights(int scales) {
  std::vector<double> w(C::kWeights.begin(), C::kWeights.begin() + scales);
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

struct Plane {
  int64_t h = 0, w = 0;
  std::vector<double> v;
  double at(int64_t y, int64_t x) const { return v[y * w + x]; }
};

// Separable Gaussian filter with valid padding.
Plane Blur(const Plane& p) {
  static const auto g = GaussianWindow();
  const int k = C::kFilterSize;
  Plane rows{p.h, p.w - k + 1, {}};
  rows.v.assign(rows.h * rows.w, 0.0);
  for (int64_t y = 0; y < rows.h; ++y) {
    for (int64_t x = 0; x < rows.w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += g[i] * p.at(y, x + i);
      rows.v[y * rows.w + x] = acc;
    }
  }
  Plane out{p.h - k + 1, rows.w, {}};
  out.v.assign(out.h * out.w, 0.0);
  for (int64_t y = 0; y < out.h; ++y) {
    for (int64_t x = 0; x < out.w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += g[i] * rows.at(y + i, x);
      out.v[y * out.w + x] = acc;
    }
  }
  return out;
}

Plane Product(const Plane& a, const Plane& b) {
  Plane out{a.h, a.w, std::vector<double>(a.v.size())};
  for (size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

// Symmetric padding of odd edges followed by 2x2 average pooling.
Plane Downsample(const Plane& p) {
  Plane out{(p.h + 1) / 2, (p.w + 1) / 2, {}};
  out.v.resize(out.h * out.w);
  for (int64_t y = 0; y < out.h; ++y) {
    const int64_t y0 = 2 * y, y1 = std::min(2 * y + 1, p.h - 1);
    for (int64_t x = 0; x < out.w; ++x) {
      const int64_t x0 = 2 * x, x1 = std::min(2 * x + 1, p.w - 1);
      out.v[y * out.w + x] =
          0.25 * (p.at(y0, x0) + p.at(y0, x1) + p.at(y1, x0) + p.at(y1, x1));
    }
  }
  return out;
}

// Mean SSIM and mean contrast-structure term of one channel at one scale.
std::pair<double, double> SsimAndCs(const Plane& a, const Plane& b,
                                    double max_val) {
  const double c1 = (C::kK1 * max_val) * (C::kK1 * max_val);
  const double c2 = (C::kK2 * max_val) * (C::kK2 * max_val);
  const Plane mu_a = Blur(a), mu_b = Blur(b);
  const Plane ab = Blur(Product(a, b));
  const Plane aa = Blur(Product(a, a)), bb = Blur(Product(b, b));
  double ssim = 0.0, cs = 0.0;
  for (size_t i = 0; i < mu_a.v.size(); ++i) {
    const double num0 = 2.0 * mu_a.v[i] * mu_b.v[i];
    const double den0 = mu_a.v[i] * mu_a.v[i] + mu_b.v[i] * mu_b.v[i];
    const double lum = (num0 + c1) / (den0 + c1);
    const double csv = (2.0 * ab.v[i] - num0 + c2) / (aa.v[i] + bb.v[i] - den0 + c2);
    ssim += lum * csv;
    cs += csv;
  }
  const double n = static_cast<double>(mu_a.v.size());
  return {ssim / n, cs / n};
}

// Depthwise Gaussian kernel (k, k, c, c), diagonal in channels.
Tensor DiagonalKernel(int64_t c, int k, const std::vector<double>& taps2d) {
  Tensor t(Shape{k, k, c, c});
  for (int y = 0; y < k; ++y) {
    for (int x = 0; x < k; ++x) {
      for (int64_t ch = 0; ch < c; ++ch) {
        t.at(y, x, ch, ch) = static_cast<float>(taps2d[y * k + x]);
      }
    }
  }
  return t;
}

}  // namespace

double ImageMse(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ContractError("image sizes differ: " + std::to_string(a.width) +
                        "x" + std::to_string(a.height) + " vs " +
                        std::to_string(b.width) + "x" +
                        std::to_string(b.height));
  }
  if (a.pixels.empty()) throw ContractError("mse of empty images");
  double acc = 0.0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixels.size());
}

double Psnr(const Image& a, const Image& b) {
  const double mse = ImageMse(a, b);
  if (mse == 0.0) return kInfiniteDb;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

int MsSsimScales(int64_t h, int64_t w) {
  if (h < C::kFilterSize || w < C::kFilterSize) {
    throw ContractError("ms-ssim needs at least " +
                        std::to_string(C::kFilterSize) + "x" +
                        std::to_string(C::kFilterSize) + " pixels, got " +
                        std::to_string(w) + "x" + std::to_string(h));
  }
  int scales = 1;
  while (scales < static_cast<int>(C::kWeights.size())) {
    h = (h + 1) / 2;
    w = (w + 1) / 2;
    if (h < C::kFilterSize || w < C::kFilterSize) break;
    ++scales;
  }
  return scales;
}

double MsSsim(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ContractError("ms-ssim image sizes differ");
  }
  const int scales = MsSsimScales(a.height, a.width);
  const auto weights = ScaleWeights(scales);
  double total = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    Plane pa{a.height, a.width, {}}, pb{b.height, b.width, {}};
    pa.v.resize(a.pixels.size() / 3);
    pb.v.resize(pa.v.size());
    for (size_t i = 0; i < pa.v.size(); ++i) {
      pa.v[i] = a.pixels[3 * i + ch];
      pb.v[i] = b.pixels[3 * i + ch];
    }
    double value = 1.0;
    for (int s = 0; s < scales; ++s) {
      const auto [ssim, cs] = SsimAndCs(pa, pb, 255.0);
      const double term = s + 1 < scales ? cs : ssim;
      value *= std::pow(std::max(term, 0.0), weights[s]);
      if (s + 1 < scales) {
        pa = Downsample(pa);
        pb = Downsample(pb);
      }
    }
    total += value;
  }
  return total / 3.0;
}

double MsSsimDb(double msssim) {
  if (msssim >= 1.0) return kInfiniteDb;
  return -10.0 * std::log10(1.0 - msssim);
}

Var MsSsim(Var a, Var b) {
  CheckSameShape(a.shape(), b.shape(), "ms_ssim");
  const Shape s = a.shape();
  const int scales = MsSsimScales(s.h, s.w);
  const auto weights = ScaleWeights(scales);
  const int k = C::kFilterSize;
  const auto g = GaussianWindow();
  std::vector<double> taps(k * k);
  for (int y = 0; y < k; ++y) {
    for (int x = 0; x < k; ++x) taps[y * k + x] = g[y] * g[x];
  }
  Tape& tape = a.tape();
  Var window = tape.Constant(DiagonalKernel(s.c, k, taps));
  Var pool = tape.Constant(DiagonalKernel(s.c, 2, {0.25, 0.25, 0.25, 0.25}));
  const float c1 = static_cast<float>(C::kK1 * C::kK1);
  const float c2 = static_cast<float>(C::kK2 * C::kK2);

  Var result;
  for (int sc = 0; sc < scales; ++sc) {
    auto blur = [&](Var v) { return Conv2D(v, window, 1, Padding::kValid); };
    Var mu_a = blur(a), mu_b = blur(b);
    Var num0 = Scale(Mul(mu_a, mu_b), 2.0f);
    Var den0 = Add(Square(mu_a), Square(mu_b));
    Var num1 = Scale(blur(Mul(a, b)), 2.0f);
    Var den1 = blur(Add(Square(a), Square(b)));
    Var cs = Div(AddScalar(Sub(num1, num0), c2), AddScalar(Sub(den1, den0), c2));
    Var term;
    if (sc + 1 < scales) {
      term = MeanSpatial(cs);
    } else {
      Var lum = Div(AddScalar(num0, c1), AddScalar(den0, c1));
      term = MeanSpatial(Mul(lum, cs));
    }
    Var powered = Pow(term, static_cast<float>(weights[sc]), 1e-6f);
    result = result.valid() ? Mul(result, powered) : powered;
    if (sc + 1 < scales) {
      if (a.shape().h % 2 != 0 || a.shape().w % 2 != 0) {
        throw ContractError("differentiable ms-ssim needs even sizes at every "
                            "scale, got " + a.shape().ToString());
      }
      a = Conv2D(a, pool, 2, Padding::kValid);
      b = Conv2D(b, pool, 2, Padding::kValid);
    }
  }
  return Scale(Sum(result), 1.0f / static_cast<float>(s.b * s.c));
}

double Bpp(uint64_t bytes, int64_t width, int64_t height) {
  if (width <= 0 || height <= 0) throw ContractError("bpp of an empty image");
  return 8.0 * static_cast<double>(bytes) / static_cast<double>(width * height);
}

}  // namespace c2f
