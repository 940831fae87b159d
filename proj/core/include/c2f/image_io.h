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

#ifndef C2F_IMAGE_IO_H_
#define C2F_IMAGE_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "c2f/tensor.h"

namespace c2f {

// Interleaved 8-bit RGB image.
struct Image {
  int64_t width = 0;
  int64_t height = 0;
  std::vector<uint8_t> pixels;  // height * width * 3

  Image() = default;
  Image(int64_t w, int64_t h, uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<size_t>(w * h * 3), fill) {}
  uint8_t& at(int64_t y, int64_t x, int c) {
    return pixels[static_cast<size_t>((y * width + x) * 3 + c)];
  }
  uint8_t at(int64_t y, int64_t x, int c) const {
    return pixels[static_cast<size_t>((y * width + x) * 3 + c)];
  }
  bool operator==(const Image&) const = default;
};

// PNG (gray, gray+alpha, RGB, RGBA; 8 or 16 bit) or binary PPM (P6,
// maxval <= 255), detected from the file signature. Alpha is dropped and
// gray is replicated to three channels.
Image ReadImage(const std::filesystem::path& path);
Image DecodePng(std::span<const uint8_t> bytes);
Image DecodePpm(std::span<const uint8_t> bytes);

// Writes PNG unless the extension is .ppm.
void WriteImage(const Image& image, const std::filesystem::path& path);
std::vector<uint8_t> EncodePng(const Image& image);
std::vector<uint8_t> EncodePpm(const Image& image);

// (1, h, w, 3) tensor with values v / 255.
Tensor ImageToTensor(const Image& image);
// Batch `index` of `t`, clipped to [0,1] and rounded to 8 bits.
Image TensorToImage(const Tensor& t, int64_t index = 0);

// Mirror-pads (without repeating the edge sample) to the next multiples of
// `multiple`.
Image ReflectPad(const Image& image, int64_t multiple);
Image Crop(const Image& image, int64_t x0, int64_t y0, int64_t width,
           int64_t height);
int64_t RoundUp(int64_t v, int64_t multiple);

}  // namespace c2f

#endif  // C2F_IMAGE_IO_H_
