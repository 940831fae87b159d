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

#ifndef C2F_WEIGHTS_IO_H_
#define C2F_WEIGHTS_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "c2f/transforms.h"

namespace c2f {

// Weights container layout (all integers little-endian):
//   "C2FW" | u16 version | u32 arch_len | arch block | u32 count | records
//   arch block: u32 n_main, u32 c_y, u32 c_z, u16 lambda_tag,
//               u8 distortion, u8 reserved
//   record: u16 name_len | name | u32 dims[4] | f32 values[prod(dims)]
inline constexpr char kWeightsMagic[4] = {'C', '2', 'F', 'W'};
inline constexpr uint16_t kWeightsVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
};

// `extra` records (e.g. optimizer state) follow the model parameters.
std::vector<uint8_t> SerializeWeights(const CodecModel& model,
                                      std::span<const NamedTensor> extra = {});
// Records not belonging to the model land in `extra` when given, and are
// otherwise ignored.
CodecModel DeserializeWeights(std::span<const uint8_t> bytes,
                              std::vector<NamedTensor>* extra = nullptr);

void SaveWeights(const CodecModel& model, const std::filesystem::path& path,
                 std::span<const NamedTensor> extra = {});
CodecModel LoadWeights(const std::filesystem::path& path,
                       std::vector<NamedTensor>* extra = nullptr);

using ModelId = std::array<uint8_t, 32>;

// SHA-256 of the serialized parameters; binds bitstreams to weights.
ModelId ComputeModelId(const CodecModel& model);
ModelId Sha256(std::span<const uint8_t> bytes);
std::string ToHex(std::span<const uint8_t> bytes);

}  // namespace c2f

#endif  // C2F_WEIGHTS_IO_H_
