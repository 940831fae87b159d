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

#ifndef C2F_METRICS_H_
#define C2F_METRICS_H_

#include <array>
#include <cstdint>
#include <limits>

#include "c2f/autodiff.h"
#include "c2f/image_io.h"

namespace c2f {

// PSNR of identical images and the dB form of MS-SSIM == 1.
inline constexpr double kInfiniteDb = std::numeric_limits<double>::infinity();

// Mean squared error on the [0, 255] scale.
double ImageMse(const Image& a, const Image& b);
// 10 log10(255^2 / MSE); kInfiniteDb for identical images.
double Psnr(const Image& a, const Image& b);

// Multi-scale SSIM. Gaussian window and stabilizers follow the reference
// definition; see docs/metrics.md.
struct MsSsimConstants {
  static constexpr int kFilterSize = 11;
  static constexpr double kFilterSigma = 1.5;
  static constexpr double kK1 = 0.01;
  static constexpr double kK2 = 0.03;
  static constexpr std::array<double, 5> kWeights = {0.0448, 0.2856, 0.3001,
                                                     0.2363, 0.1333};
};

// Number of scales used for an h x w image: the largest count up to 5 whose
// coarsest level is still at least one filter wide. Fewer than five scales
// use the leading weights renormalized to sum to one. Throws ContractError
// below 11 x 11.
int MsSsimScales(int64_t h, int64_t w);

// Per-channel MS-SSIM averaged over RGB, in [0, 1] for natural images.
double MsSsim(const Image& a, const Image& b);
// -10 log10(1 - d); kInfiniteDb at d >= 1.
double MsSsimDb(double msssim);

// Differentiable MS-SSIM of (b, h, w, c) tensors with values in [0, 1],
// averaged over batch and channels. Every level must have even h and w.
Var MsSsim(Var a, Var b);

// 8 * bytes / (w * h).
double Bpp(uint64_t bytes, int64_t width, int64_t height);

}  // namespace c2f

#endif  // C2F_METRICS_H_
