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
#include <fstream>
#include <sstream>
#include <string>

#include "c2f/errors.h"
#include "c2f/image_io.h"
#include "c2f/metrics.h"
#include "c2f/random.h"
#include "doctest.h"
#include "test_util.h"

namespace c2f {
namespace {

Image Noise(int64_t w, int64_t h, uint64_t seed) {
  Rng rng(seed);
  Image img(w, h);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(rng.Below(256));
  return img;
}

// A smooth image plus a noisy copy, so MS-SSIM lands well inside (0, 1).
std::pair<Image, Image> Pair(int64_t w, int64_t h, uint64_t seed) {
  Rng rng(seed);
  Image a(w, h), b(w, h);
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = 128 + 90 * std::sin(0.07 * x + 0.05 * y + c) *
                                   std::cos(0.031 * x * (c + 1) - 0.02 * y);
        a.at(y, x, c) = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
        b.at(y, x, c) = static_cast<uint8_t>(std::clamp(v + 20 * rng.Normal(), 0.0, 255.0));
      }
    }
  }
  return {a, b};
}

TEST_CASE("psnr edge cases") {
  const Image a = Noise(16, 16, 1);
  CHECK(Psnr(a, a) == kInfiniteDb);
  CHECK(ImageMse(a, a) == 0.0);
  CHECK(std::abs(Psnr(Image(8, 8, 0), Image(8, 8, 128)) - 5.987) < 5e-4);
  const Image b = Noise(16, 16, 2);
  CHECK(Psnr(a, b) == Psnr(b, a));
  CHECK(Psnr(Image(4, 4, 0), Image(4, 4, 1)) ==
        doctest::Approx(10 * std::log10(65025.0)).epsilon(1e-12));
  CHECK_THROWS_AS(Psnr(a, Noise(8, 16, 1)), ContractError);
}

TEST_CASE("ms-ssim scale count") {
  CHECK(MsSsimScales(176, 176) == 5);
  CHECK(MsSsimScales(175, 400) == 5);
  CHECK(MsSsimScales(160, 400) == 4);
  CHECK(MsSsimScales(88, 88) == 4);
  CHECK(MsSsimScales(65, 77) == 3);
  CHECK(MsSsimScales(11, 11) == 1);
  CHECK_THROWS_AS(MsSsimScales(10, 64), ContractError);
}

TEST_CASE("ms-ssim matches the tensorflow reference fixtures") {
  std::ifstream in(testing::DataPath("msssim/reference.csv"));
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string f[5];
    for (auto& s : f) std::getline(ss, s, ',');
    const Image ref = ReadImage(testing::DataPath("msssim/ref" + f[0] + ".png"));
    const Image dist = ReadImage(testing::DataPath("msssim/dist" + f[0] + ".png"));
    CAPTURE(line);
    CHECK(ref.height == std::stoi(f[1]));
    CHECK(ref.width == std::stoi(f[2]));
    CHECK(MsSsimScales(ref.height, ref.width) == std::stoi(f[3]));
    CHECK(std::abs(MsSsim(ref, dist) - std::stod(f[4])) < 1e-4);
    ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("ms-ssim identity, symmetry and dB") {
  const auto [a, b] = Pair(96, 96, 3);
  CHECK(MsSsim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(MsSsim(a, b) - MsSsim(b, a)) < 1e-12);
  CHECK(MsSsimDb(1.0) == kInfiniteDb);
  CHECK(MsSsimDb(0.9) == 10.0);
  CHECK(std::abs(MsSsimDb(0.99) - 20.0) < 1e-12);
}

TEST_CASE("differentiable ms-ssim agrees with the image version") {
  const auto [a, b] = Pair(192, 192, 4);
  Tape tape;
  const double got = MsSsim(tape.Constant(ImageToTensor(a)),
                            tape.Constant(ImageToTensor(b))).value()[0];
  CHECK(std::abs(got - MsSsim(a, b)) < 1e-4);
  const auto [c, d] = Pair(48, 64, 5);
  const double small = MsSsim(tape.Constant(ImageToTensor(c)),
                              tape.Constant(ImageToTensor(d))).value()[0];
  CHECK(std::abs(small - MsSsim(c, d)) < 1e-4);
  CHECK_THROWS_AS(MsSsim(tape.Constant(Tensor({1, 50, 50, 3})),
                         tape.Constant(Tensor({1, 50, 50, 3}))), ContractError);
}

TEST_CASE("differentiable ms-ssim gradient") {
  const auto [a, b] = Pair(44, 44, 7);
  Tensor ta = ImageToTensor(a), tb = ImageToTensor(b);
  const testing::GradCheck g = testing::CheckGradients(
      [](auto& v) { return MsSsim(v[0], v[1]); }, {ta, tb}, 1e-2);
  CHECK(g.worst() < 2e-2);
}

TEST_CASE("bits per pixel") {
  CHECK(Bpp(1000, 100, 80) == 1.0);
  CHECK(Bpp(0, 10, 10) == 0.0);
  CHECK(Bpp(3, 2, 3) == 4.0);
  CHECK_THROWS_AS(Bpp(1, 0, 5), ContractError);
}

}  // namespace
}  // namespace c2f
