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

#ifndef C2F_CONTAINER_H_
#define C2F_CONTAINER_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace c2f {

// Compressed image file, all integers little-endian:
//
//   offset size field
//   0      4    magic "C2F1"
//   4      2    version (2)
//   6      32   model_id: SHA-256 of the weights file
//   38     4    orig_w
//   42     4    orig_h
//   46     4    pad_w (multiple of 64, >= orig_w)
//   50     4    pad_h (multiple of 64, >= orig_h)
//   54     2    lambda_tag
//   56     8    len_z
//   64     8    len_y
//   72     8    len_x
//   80     4    crc32 of bytes [0, 80) followed by all payload bytes
//   84          Z payload | Y payload | X payload, no padding
inline constexpr char kContainerMagic[4] = {'C', '2', 'F', '1'};
inline constexpr uint16_t kContainerVersion = 2;
inline constexpr size_t kContainerHeaderSize = 84;

struct ContainerHeader {
  uint16_t version = kContainerVersion;
  std::array<uint8_t, 32> model_id{};
  uint32_t orig_w = 0;
  uint32_t orig_h = 0;
  uint32_t pad_w = 0;
  uint32_t pad_h = 0;
  uint16_t lambda_tag = 0;
  uint64_t len_z = 0;
  uint64_t len_y = 0;
  uint64_t len_x = 0;
  uint32_t crc32 = 0;  // filled in by WriteContainer

  bool operator==(const ContainerHeader&) const = default;
};

struct ContainerPayload {
  ContainerHeader header;
  std::vector<uint8_t> z, y, x;
};

// Stream lengths in `header` are taken from the payloads.
std::vector<uint8_t> WriteContainer(ContainerHeader header,
                                    std::span<const uint8_t> z,
                                    std::span<const uint8_t> y,
                                    std::span<const uint8_t> x);

// Exact inverse of WriteContainer. Raises FormatError with kind kTruncated,
// kBadMagic, kVersionMismatch, kBadHeader or kChecksumMismatch.
ContainerPayload ReadContainer(std::span<const uint8_t> bytes);

// Throws FormatError(kModelMismatch) unless the header names `model_id`.
void CheckModelId(const ContainerHeader& header,
                  const std::array<uint8_t, 32>& model_id);

}  // namespace c2f

#endif  // C2F_CONTAINER_H_
