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

#include "c2f/weights_io.h"

#include <cstring>
#include <map>

#include <openssl/evp.h>

#include "c2f/bytes.h"
#include "c2f/errors.h"

namespace c2f {
namespace {

void WriteRecord(ByteWriter& w, const std::string& name, const Tensor& t) {
  if (name.size() > 0xFFFF) throw ContractError("record name too long");
  w.U16(static_cast<uint16_t>(name.size()));
  w.Str(name);
  const Shape& s = t.shape();
  for (int64_t d : {s.b, s.h, s.w, s.c}) w.U32(static_cast<uint32_t>(d));
  for (float v : t.values()) w.F32(v);
}

}  // namespace

std::vector<uint8_t> SerializeWeights(const CodecModel& model,
                                      std::span<const NamedTensor> extra) {
  ByteWriter w;
  w.Bytes({reinterpret_cast<const uint8_t*>(kWeightsMagic), 4});
  w.U16(kWeightsVersion);
  w.U32(16);
  w.U32(static_cast<uint32_t>(model.arch().n_main));
  w.U32(static_cast<uint32_t>(model.arch().c_y));
  w.U32(static_cast<uint32_t>(model.arch().c_z));
  w.U16(model.lambda_tag());
  w.U8(static_cast<uint8_t>(model.distortion()));
  w.U8(0);
  w.U32(static_cast<uint32_t>(model.parameters().size() + extra.size()));
  for (const Parameter& p : model.parameters()) WriteRecord(w, p.name, p.value);
  for (const NamedTensor& e : extra) WriteRecord(w, e.name, e.value);
  return std::move(w.data());
}

CodecModel DeserializeWeights(std::span<const uint8_t> bytes,
                              std::vector<NamedTensor>* extra) {
  ByteReader r(bytes, "weights file");
  const auto magic = r.Bytes(4);
  if (std::memcmp(magic.data(), kWeightsMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, "not a C2FW weights file");
  }
  const uint16_t version = r.U16();
  if (version != kWeightsVersion) {
    throw FormatError(FormatErrorKind::kVersionMismatch,
                      "weights version " + std::to_string(version) +
                          ", expected " + std::to_string(kWeightsVersion));
  }
  const uint32_t arch_len = r.U32();
  if (arch_len < 16) {
    throw FormatError(FormatErrorKind::kBadHeader, "arch block too short");
  }
  ByteReader ar(r.Bytes(arch_len), "arch block");
  ArchConfig arch;
  arch.n_main = ar.U32();
  arch.c_y = ar.U32();
  arch.c_z = ar.U32();
  const uint16_t lambda_tag = ar.U16();
  const uint8_t distortion = ar.U8();
  if (distortion > 1) {
    throw FormatError(FormatErrorKind::kBadHeader, "unknown distortion kind");
  }
  try {
    arch.Validate();
  } catch (const ContractError& e) {
    throw FormatError(FormatErrorKind::kBadHeader, e.what());
  }
  CodecModel model(arch, 0);
  model.set_lambda_tag(lambda_tag);
  model.set_distortion(static_cast<DistortionKind>(distortion));

  std::vector<bool> seen(model.parameters().size(), false);
  const uint32_t count = r.U32();
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = r.U16();
    const auto name_bytes = r.Bytes(name_len);
    const std::string name(name_bytes.begin(), name_bytes.end());
    Shape s;
    s.b = r.U32();
    s.h = r.U32();
    s.w = r.U32();
    s.c = r.U32();
    if (s.size() > static_cast<int64_t>(r.remaining() / 4)) {
      throw FormatError(FormatErrorKind::kTruncated,
                        "record '" + name + "' runs past end of file");
    }
    Tensor t(s);
    for (int64_t k = 0; k < t.size(); ++k) t[k] = r.F32();
    const int idx = model.FindParameter(name);
    if (idx < 0) {
      if (extra != nullptr) extra->push_back({name, std::move(t)});
      continue;
    }
    Parameter& p = model.parameters()[idx];
    if (!(p.value.shape() == s)) {
      throw FormatError(FormatErrorKind::kBadHeader,
                        "parameter '" + name + "' has shape " + s.ToString() +
                            ", architecture expects " +
                            p.value.shape().ToString());
    }
    p.value = std::move(t);
    p.grad = Tensor(s);
    seen[idx] = true;
  }
  for (size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw FormatError(FormatErrorKind::kBadHeader,
                        "missing parameter '" + model.parameters()[i].name + "'");
    }
  }
  if (r.remaining() != 0) {
    throw FormatError(FormatErrorKind::kBadHeader,
                      std::to_string(r.remaining()) + " trailing bytes");
  }
  return model;
}

void SaveWeights(const CodecModel& model, const std::filesystem::path& path,
                 std::span<const NamedTensor> extra) {
  WriteFileBytes(path, SerializeWeights(model, extra));
}

CodecModel LoadWeights(const std::filesystem::path& path,
                       std::vector<NamedTensor>* extra) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  try {
    return DeserializeWeights(bytes, extra);
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.what());
  }
}

ModelId Sha256(std::span<const uint8_t> bytes) {
  ModelId id{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), id.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != id.size()) {
    throw std::runtime_error("sha256 digest failed");
  }
  return id;
}

ModelId ComputeModelId(const CodecModel& model) {
  return Sha256(SerializeWeights(model));
}

std::string ToHex(std::span<const uint8_t> bytes) {
  static const char* kDigits = "0123456789abcdef";
  std::string out;
  for (uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 15]);
  }
  return out;
}

}  // namespace c2f
