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

#include "c2f/image_io.h"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <string>

#include "c2f/bytes.h"
#include "c2f/errors.h"

namespace c2f {
namespace {

constexpr uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

struct PngReadState {
  std::span<const uint8_t> bytes;
  size_t pos = 0;
};

void PngRead(png_structp png, png_bytep out, png_size_t n) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->bytes.size() - st->pos < n) png_error(png, "unexpected end of PNG");
  std::memcpy(out, st->bytes.data() + st->pos, n);
  st->pos += n;
}

void PngWrite(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void PngFlush(png_structp) {}

[[noreturn]] void PngError(png_structp, png_const_charp msg) {
  throw FormatError(FormatErrorKind::kBadHeader, std::string("png: ") + msg);
}

void PngWarning(png_structp, png_const_charp) {}

// Skips whitespace and '#' comments in a PNM header.
int64_t PnmNumber(std::span<const uint8_t> b, size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  int64_t v = 0;
  size_t digits = 0;
  while (pos < b.size() && std::isdigit(b[pos]) && digits < 10) {
    v = v * 10 + (b[pos] - '0');
    ++pos;
    ++digits;
  }
  if (digits == 0) {
    throw FormatError(FormatErrorKind::kBadHeader, "ppm: malformed header");
  }
  return v;
}

int64_t Mirror(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

Image DecodePng(std::span<const uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSignature, 8) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, "not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           PngError, PngWarning);
  if (png == nullptr) throw std::bad_alloc();
  png_infop info = png_create_info_struct(png);
  PngReadState st{bytes, 0};
  Image img;
  try {
    png_set_read_fn(png, &st, PngRead);
    png_read_info(png, info);
    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
      png_set_expand_gray_1_2_4_to_8(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_gray_to_rgb(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    if (png_get_rowbytes(png, info) != static_cast<size_t>(w) * 3) {
      throw FormatError(FormatErrorKind::kBadHeader, "png: unsupported layout");
    }
    img = Image(w, h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = &img.pixels[y * w * 3];
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

Image DecodePpm(std::span<const uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw FormatError(FormatErrorKind::kBadMagic, "not a binary PPM (P6)");
  }
  size_t pos = 2;
  const int64_t w = PnmNumber(bytes, pos);
  const int64_t h = PnmNumber(bytes, pos);
  const int64_t maxval = PnmNumber(bytes, pos);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw FormatError(FormatErrorKind::kBadHeader,
                      "ppm: unsupported dims or maxval " + std::to_string(maxval));
  }
  ++pos;  // single whitespace before the raster
  const size_t need = static_cast<size_t>(w * h * 3);
  if (pos > bytes.size() || bytes.size() - pos < need) {
    throw FormatError(FormatErrorKind::kTruncated, "ppm: raster truncated");
  }
  Image img(w, h);
  for (size_t i = 0; i < need; ++i) {
    const int v = bytes[pos + i];
    img.pixels[i] = static_cast<uint8_t>(
        maxval == 255 ? v : std::min<int>(255, (v * 255 + static_cast<int>(maxval) / 2) / static_cast<int>(maxval)));
  }
  return img;
}

Image ReadImage(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  try {
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
      return DecodePng(bytes);
    }
    return DecodePpm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<uint8_t> EncodePng(const Image& image) {
  if (image.width <= 0 || image.height <= 0) {
    throw ContractError("cannot encode an empty image");
  }
  std::vector<uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            PngError, PngWarning);
  if (png == nullptr) throw std::bad_alloc();
  png_infop info = png_create_info_struct(png);
  try {
    png_set_write_fn(png, &out, PngWrite, PngFlush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int64_t y = 0; y < image.height; ++y) {
      png_write_row(png, const_cast<png_bytep>(&image.pixels[y * image.width * 3]));
    }
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

std::vector<uint8_t> EncodePpm(const Image& image) {
  const std::string header = "P6\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void WriteImage(const Image& image, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  WriteFileBytes(path, ext == ".ppm" ? EncodePpm(image) : EncodePng(image));
}

Tensor ImageToTensor(const Image& image) {
  Tensor t(Shape{1, image.height, image.width, 3});
  for (size_t i = 0; i < image.pixels.size(); ++i) {
    t[static_cast<int64_t>(i)] = image.pixels[i] / 255.0f;
  }
  return t;
}

Image TensorToImage(const Tensor& t, int64_t index) {
  const Shape& s = t.shape();
  if (s.c != 3 || index < 0 || index >= s.b) {
    throw ContractError("tensor " + s.ToString() + " is not an RGB batch");
  }
  Image img(s.w, s.h);
  const float* src = t.data() + index * s.h * s.w * 3;
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    const float v = std::clamp(src[i], 0.0f, 1.0f);
    img.pixels[i] = static_cast<uint8_t>(std::lround(v * 255.0f));
  }
  return img;
}

int64_t RoundUp(int64_t v, int64_t multiple) {
  return (v + multiple - 1) / multiple * multiple;
}

Image ReflectPad(const Image& image, int64_t multiple) {
  if (image.width <= 0 || image.height <= 0) {
    throw ContractError("cannot pad an empty image");
  }
  const int64_t w = RoundUp(image.width, multiple);
  const int64_t h = RoundUp(image.height, multiple);
  Image out(w, h);
  for (int64_t y = 0; y < h; ++y) {
    const int64_t sy = Mirror(y, image.height);
    for (int64_t x = 0; x < w; ++x) {
      const int64_t sx = Mirror(x, image.width);
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = image.at(sy, sx, c);
    }
  }
  return out;
}

Image Crop(const Image& image, int64_t x0, int64_t y0, int64_t width,
           int64_t height) {
  if (x0 < 0 || y0 < 0 || width <= 0 || height <= 0 ||
      x0 + width > image.width || y0 + height > image.height) {
    throw ContractError("crop window outside image");
  }
  Image out(width, height);
  for (int64_t y = 0; y < height; ++y) {
    std::copy_n(&image.pixels[((y0 + y) * image.width + x0) * 3], width * 3,
                &out.pixels[y * width * 3]);
  }
  return out;
}

}  // namespace c2f
