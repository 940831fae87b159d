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

#include "c2f/codec.h"

#include <cmath>

#include "c2f/bytes.h"
#include "c2f/entropy.h"
#include "c2f/errors.h"

namespace c2f {
namespace {

struct Frozen {
  Tape tape;
  std::vector<Var> params;
  explicit Frozen(const CodecModel& m) : params(m.BindFrozen(tape)) {}
};

std::pair<Tensor, Tensor> SideAndParams(const CodecModel& model, Frozen& f,
                                        const Tensor& code, int level,
                                        Tensor* side) {
  Var s = model.HyperSynthesis(f.params, f.tape.Constant(code), level);
  auto [mu, sigma] = model.PredictParams(f.params, s, level);
  *side = s.value();
  return {mu.value(), sigma.value()};
}

// Re-raises a coder error with the stream name and a container offset.
template <typename Fn>
auto WithStreamOffset(const char* name, uint64_t base, Fn&& fn) {
  try {
    return fn();
  } catch (const CorruptStreamError& e) {
    throw CorruptStreamError(std::string(name) + " stream: " + e.what(),
                             base + e.offset());
  }
}

void AppendLe(std::vector<uint8_t>& out, const std::vector<int32_t>& v) {
  for (int32_t s : v) {
    const auto u = static_cast<uint32_t>(s);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(u >> (8 * i)));
  }
}

}  // namespace

std::string LatentChecksum(const LatentSymbols& latents) {
  std::vector<uint8_t> bytes;
  bytes.reserve(4 * (latents.z.size() + latents.y.size() + latents.x.size()));
  AppendLe(bytes, latents.z);
  AppendLe(bytes, latents.y);
  AppendLe(bytes, latents.x);
  return ToHex(Sha256(bytes));
}

Shape LatentShape(const ArchConfig& arch, int64_t pad_h, int64_t pad_w,
                  int level) {
  switch (level) {
    case 0:
      return {1, pad_h / 16, pad_w / 16, arch.n_main};
    case 1:
      return {1, pad_h / 32, pad_w / 32, arch.c_y};
    case 2:
      return {1, pad_h / 64, pad_w / 64, arch.c_z};
  }
  throw ContractError("latent level must be 0, 1 or 2");
}

EncodeResult EncodeImage(const CodecModel& model, const ModelId& model_id,
                         const Image& image) {
  if (image.width <= 0 || image.height <= 0) {
    throw ContractError("cannot encode an empty image");
  }
  const Image padded = ReflectPad(image, ArchConfig::kDownsampling);
  Frozen f(model);
  const auto& p = f.params;
  Var in = f.tape.Constant(ImageToTensor(padded));
  Var x_cont = model.Analysis(p, in);
  Var y_cont = model.HyperAnalysis(p, x_cont, 1);
  Var z_cont = model.HyperAnalysis(p, y_cont, 2);

  EncodeResult r;
  const Tensor z = RoundHalfAway(z_cont.value());
  const Tensor y = RoundHalfAway(y_cont.value());
  const Tensor x = RoundHalfAway(x_cont.value());
  const Tensor sigma_z = model.SigmaZ(p).value();
  Tensor side;
  const auto [mu_y, sigma_y] = SideAndParams(model, f, z, 2, &side);
  const auto [mu_x, sigma_x] = SideAndParams(model, f, y, 1, &side);

  r.latents = {z.shape(), y.shape(), x.shape(),
               ToSymbols(z), ToSymbols(y), ToSymbols(x)};
  const CodedStream cz = EncodeLatent(r.latents.z, ZTableFn(z.shape(), sigma_z));
  const CodedStream cy = EncodeLatent(r.latents.y, GaussianTableFn(mu_y, sigma_y));
  const CodedStream cx = EncodeLatent(r.latents.x, GaussianTableFn(mu_x, sigma_x));
  r.stats.ideal_bits_z = cz.ideal_bits;
  r.stats.ideal_bits_y = cy.ideal_bits;
  r.stats.ideal_bits_x = cx.ideal_bits;
  {
    Tape t;
    r.stats.model_bits =
        RateBits(ZLikelihood(t.Constant(z), t.Constant(sigma_z)).value()) +
        RateBits(GaussianLikelihood(t.Constant(y), t.Constant(mu_y),
                                    t.Constant(sigma_y)).value()) +
        RateBits(GaussianLikelihood(t.Constant(x), t.Constant(mu_x),
                                    t.Constant(sigma_x)).value());
  }

  ContainerHeader h;
  h.model_id = model_id;
  h.orig_w = static_cast<uint32_t>(image.width);
  h.orig_h = static_cast<uint32_t>(image.height);
  h.pad_w = static_cast<uint32_t>(padded.width);
  h.pad_h = static_cast<uint32_t>(padded.height);
  h.lambda_tag = model.lambda_tag();
  r.container = WriteContainer(h, cz.bytes, cy.bytes, cx.bytes);
  r.bpp = 8.0 * static_cast<double>(r.container.size()) /
          static_cast<double>(image.width * image.height);
  return r;
}

ParsedStream::ParsedStream(std::span<const uint8_t> bytes,
                           const CodecModel& model, const ModelId& model_id)
    : model_(&model), payload_(ReadContainer(bytes)) {
  CheckModelId(payload_.header, model_id);
  const auto& h = payload_.header;
  x_shape_ = LatentShape(model.arch(), h.pad_h, h.pad_w, 0);
  y_shape_ = LatentShape(model.arch(), h.pad_h, h.pad_w, 1);
  z_shape_ = LatentShape(model.arch(), h.pad_h, h.pad_w, 2);
}

ZStage ParsedStream::DecodeZ() const {
  Frozen f(*model_);
  const Tensor sigma_z = model_->SigmaZ(f.params).value();
  const auto sym = WithStreamOffset("Z", kContainerHeaderSize, [&] {
    return DecodeLatent(payload_.z, static_cast<size_t>(z_shape_.size()),
                        ZTableFn(z_shape_, sigma_z));
  });
  Tensor z = FromSymbols(z_shape_, sym);
  Tensor side2;
  SideAndParams(*model_, f, z, 2, &side2);
  return ZStage(*this, std::move(z), std::move(side2));
}

YStage ZStage::DecodeY() const {
  const CodecModel& model = *stream_->model_;
  Frozen f(model);
  Tensor side;
  const auto [mu_y, sigma_y] = SideAndParams(model, f, z_, 2, &side);
  const uint64_t base = kContainerHeaderSize + stream_->header().len_z;
  const auto sym = WithStreamOffset("Y", base, [&] {
    return DecodeLatent(stream_->payload_.y,
                        static_cast<size_t>(stream_->y_shape_.size()),
                        GaussianTableFn(mu_y, sigma_y));
  });
  Tensor y = FromSymbols(stream_->y_shape_, sym);
  Tensor side1;
  SideAndParams(model, f, y, 1, &side1);
  return YStage(*this, std::move(y), std::move(side1));
}

XStage YStage::DecodeX() const {
  const ParsedStream& s = *zs_->stream_;
  Frozen f(*s.model_);
  Tensor side;
  const auto [mu_x, sigma_x] = SideAndParams(*s.model_, f, y_, 1, &side);
  const uint64_t base =
      kContainerHeaderSize + s.header().len_z + s.header().len_y;
  const auto sym = WithStreamOffset("X", base, [&] {
    return DecodeLatent(s.payload_.x, static_cast<size_t>(s.x_shape_.size()),
                        GaussianTableFn(mu_x, sigma_x));
  });
  return XStage(*this, FromSymbols(s.x_shape_, sym));
}

LatentSymbols XStage::Symbols() const {
  const ZStage& zs = *ys_->zs_;
  return {zs.z_.shape(),  ys_->y_.shape(), x_.shape(),
          ToSymbols(zs.z_), ToSymbols(ys_->y_), ToSymbols(x_)};
}

Image XStage::Reconstruct() const {
  const ZStage& zs = *ys_->zs_;
  const ParsedStream& s = *zs.stream_;
  Frozen f(*s.model_);
  Var out = s.model_->Synthesize(f.params, f.tape.Constant(x_),
                                 f.tape.Constant(ys_->side1_),
                                 f.tape.Constant(zs.side2_));
  const Image full = TensorToImage(out.value());
  const auto& h = s.header();
  return Crop(full, 0, 0, h.orig_w, h.orig_h);
}

DecodeResult DecodeImage(const CodecModel& model, const ModelId& model_id,
                         std::span<const uint8_t> container) {
  const ParsedStream stream(container, model, model_id);
  const ZStage z = stream.DecodeZ();
  const YStage y = z.DecodeY();
  const XStage x = y.DecodeX();
  return {x.Reconstruct(), x.Symbols()};
}

}  // namespace c2f
