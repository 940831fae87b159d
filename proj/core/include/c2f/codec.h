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

#ifndef C2F_CODEC_H_
#define C2F_CODEC_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "c2f/container.h"
#include "c2f/image_io.h"
#include "c2f/transforms.h"
#include "c2f/weights_io.h"

namespace c2f {

// Integer symbols of the three latents in coding order.
struct LatentSymbols {
  Shape z_shape, y_shape, x_shape;
  std::vector<int32_t> z, y, x;

  bool operator==(const LatentSymbols&) const = default;
};

// SHA-256 over the little-endian symbols of Z, Y then X, as hex.
std::string LatentChecksum(const LatentSymbols& latents);

struct EncodeStats {
  // Cross entropy under the integer tables, per stream, in bits.
  double ideal_bits_z = 0.0;
  double ideal_bits_y = 0.0;
  double ideal_bits_x = 0.0;
  // -sum log2 of the float likelihoods, in bits.
  double model_bits = 0.0;
  double ideal_bits() const { return ideal_bits_z + ideal_bits_y + ideal_bits_x; }
};

struct EncodeResult {
  std::vector<uint8_t> container;
  LatentSymbols latents;
  EncodeStats stats;
  double bpp = 0.0;
};

// Reflect-pads `image` to a multiple of 64, runs the analysis side and
// range-codes Z, Y and X.
EncodeResult EncodeImage(const CodecModel& model, const ModelId& model_id,
                         const Image& image);

// Staged decoding. Each stage can only be built from the previous one, so
// the tables of Y exist only once Z is decoded and those of X once Y is.
class ZStage;
class YStage;
class XStage;

class ParsedStream {
 public:
  // Parses the container and checks it names `model_id` and fits `model`.
  ParsedStream(std::span<const uint8_t> bytes, const CodecModel& model,
               const ModelId& model_id);
  const ContainerHeader& header() const { return payload_.header; }
  ZStage DecodeZ() const;

 private:
  friend class ZStage;
  friend class YStage;
  friend class XStage;
  const CodecModel* model_;
  ContainerPayload payload_;
  Shape z_shape_, y_shape_, x_shape_;
};

class ZStage {
 public:
  const Tensor& z() const { return z_; }
  YStage DecodeY() const;

 private:
  friend class ParsedStream;
  friend class YStage;
  friend class XStage;
  ZStage(const ParsedStream& s, Tensor z, Tensor side2)
      : stream_(&s), z_(std::move(z)), side2_(std::move(side2)) {}
  const ParsedStream* stream_;
  Tensor z_, side2_;
};

class YStage {
 public:
  const Tensor& y() const { return y_; }
  XStage DecodeX() const;

 private:
  friend class ZStage;
  friend class XStage;
  YStage(const ZStage& z, Tensor y, Tensor side1)
      : zs_(&z), y_(std::move(y)), side1_(std::move(side1)) {}
  const ZStage* zs_;
  Tensor y_, side1_;
};

class XStage {
 public:
  const Tensor& x() const { return x_; }
  LatentSymbols Symbols() const;
  // Synthesizes, clips and crops to the original size.
  Image Reconstruct() const;

 private:
  friend class YStage;
  XStage(const YStage& y, Tensor x) : ys_(&y), x_(std::move(x)) {}
  const YStage* ys_;
  Tensor x_;
};

struct DecodeResult {
  Image image;
  LatentSymbols latents;
};

DecodeResult DecodeImage(const CodecModel& model, const ModelId& model_id,
                         std::span<const uint8_t> container);

// Latent grid of a padded image.
Shape LatentShape(const ArchConfig& arch, int64_t pad_h, int64_t pad_w,
                  int level);

}  // namespace c2f

#endif  // C2F_CODEC_H_
