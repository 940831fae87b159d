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

#include "c2f/container.h"

#include <cstring>
#include <string>

#include "c2f/bytes.h"
#include "c2f/errors.h"
#include "c2f/weights_io.h"

namespace c2f {
namespace {

void WriteHeaderFields(ByteWriter& w, const ContainerHeader& h) {
  w.Bytes({reinterpret_cast<const uint8_t*>(kContainerMagic), 4});
  w.U16(h.version);
  w.Bytes(h.model_id);
  w.U32(h.orig_w);
  w.U32(h.orig_h);
  w.U32(h.pad_w);
  w.U32(h.pad_h);
  w.U16(h.lambda_tag);
  w.U64(h.len_z);
  w.U64(h.len_y);
  w.U64(h.len_x);
}

void CheckDims(const ContainerHeader& h) {
  if (h.orig_w == 0 || h.orig_h == 0) {
    throw FormatError(FormatErrorKind::kBadHeader, "zero image dimension");
  }
  if (h.pad_w % 64 != 0 || h.pad_h % 64 != 0 || h.pad_w < h.orig_w ||
      h.pad_h < h.orig_h || h.pad_w - h.orig_w >= 64 ||
      h.pad_h - h.orig_h >= 64) {
    throw FormatError(FormatErrorKind::kBadHeader,
                      "padded size " + std::to_string(h.pad_w) + "x" +
                          std::to_string(h.pad_h) +
                          " is not the 64-aligned cover of " +
                          std::to_string(h.orig_w) + "x" +
                          std::to_string(h.orig_h));
  }
}

}  // namespace

std::vector<uint8_t> WriteContainer(ContainerHeader header,
                                    std::span<const uint8_t> z,
                                    std::span<const uint8_t> y,
                                    std::span<const uint8_t> x) {
  header.version = kContainerVersion;
  header.len_z = z.size();
  header.len_y = y.size();
  header.len_x = x.size();
  try {
    CheckDims(header);
  } catch (const FormatError& e) {
    throw ContractError(e.what());
  }
  ByteWriter w;
  WriteHeaderFields(w, header);
  uint32_t crc = Crc32(w.data());
  crc = Crc32(z, crc);
  crc = Crc32(y, crc);
  crc = Crc32(x, crc);
  w.U32(crc);
  w.Bytes(z);
  w.Bytes(y);
  w.Bytes(x);
  return std::move(w.data());
}

ContainerPayload ReadContainer(std::span<const uint8_t> bytes) {
  ByteReader r(bytes, "container");
  const auto magic = r.Bytes(4);
  if (std::memcmp(magic.data(), kContainerMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, "not a C2F1 container");
  }
  ContainerPayload out;
  ContainerHeader& h = out.header;
  h.version = r.U16();
  if (h.version != kContainerVersion) {
    throw FormatError(FormatErrorKind::kVersionMismatch,
                      "container version " + std::to_string(h.version) +
                          ", this build reads " +
                          std::to_string(kContainerVersion));
  }
  const auto id = r.Bytes(32);
  std::copy(id.begin(), id.end(), h.model_id.begin());
  h.orig_w = r.U32();
  h.orig_h = r.U32();
  h.pad_w = r.U32();
  h.pad_h = r.U32();
  h.lambda_tag = r.U16();
  h.len_z = r.U64();
  h.len_y = r.U64();
  h.len_x = r.U64();
  h.crc32 = r.U32();
  CheckDims(h);
  const uint64_t payload = bytes.size() - kContainerHeaderSize;
  if (h.len_z > payload || h.len_y > payload || h.len_x > payload ||
      h.len_z + h.len_y + h.len_x != payload) {
    const bool shorter = h.len_z + h.len_y + h.len_x > payload;
    throw FormatError(shorter ? FormatErrorKind::kTruncated
                              : FormatErrorKind::kBadHeader,
                      "stream lengths " + std::to_string(h.len_z) + "+" +
                          std::to_string(h.len_y) + "+" +
                          std::to_string(h.len_x) + " vs " +
                          std::to_string(payload) + " payload bytes");
  }
  const uint32_t crc = Crc32(bytes.subspan(kContainerHeaderSize),
                             Crc32(bytes.first(kContainerHeaderSize - 4)));
  if (crc != h.crc32) {
    throw FormatError(FormatErrorKind::kChecksumMismatch,
                      "container crc32 does not match contents");
  }
  const auto z = r.Bytes(h.len_z);
  const auto y = r.Bytes(h.len_y);
  const auto x = r.Bytes(h.len_x);
  out.z.assign(z.begin(), z.end());
  out.y.assign(y.begin(), y.end());
  out.x.assign(x.begin(), x.end());
  return out;
}

void CheckModelId(const ContainerHeader& header,
                  const std::array<uint8_t, 32>& model_id) {
  if (header.model_id != model_id) {
    throw FormatError(FormatErrorKind::kModelMismatch,
                      "bitstream was written by model " +
                          ToHex(header.model_id) + ", supplied weights are " +
                          ToHex(model_id));
  }
}

}  // namespace c2f
