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

#ifndef C2F_RANGE_CODER_H_
#define C2F_RANGE_CODER_H_

#include <cstdint>
#include <span>
#include <vector>

namespace c2f {

// Probability resolution of every table: frequencies sum to 2^16.
inline constexpr int kProbBits = 16;
inline constexpr uint32_t kProbTotal = 1u << kProbBits;

// Integer cumulative distribution over symbols [smin, smin + num_symbols).
// cdf has one more entry than there are bins; cdf.front() == 0 and
// cdf.back() == kProbTotal. When `escape` is set the final bin is an escape
// code for symbols outside the alphabet, followed by a raw 32-bit value.
struct CdfTable {
  int32_t smin = 0;
  std::vector<uint32_t> cdf;
  bool escape = false;

  int32_t num_bins() const { return static_cast<int32_t>(cdf.size()) - 1; }
  int32_t num_symbols() const { return num_bins() - (escape ? 1 : 0); }
  int32_t smax() const { return smin + num_symbols() - 1; }
  bool Contains(int32_t s) const { return s >= smin && s <= smax(); }
  uint32_t Frequency(int32_t bin) const { return cdf[bin + 1] - cdf[bin]; }
  // Bits the coder spends on `s` under this table, escape payload included.
  double CostBits(int32_t s) const;
  // Throws ContractError unless the table is strictly increasing and
  // normalized.
  void Validate() const;
};

// 64-bit-low / 32-bit-range arithmetic coder with byte-wise renormalization
// and carry propagation through a cached byte.
class RangeEncoder {
 public:
  void Encode(int32_t symbol, const CdfTable& table);
  // A 16-bit value under a uniform model.
  void EncodeRaw16(uint32_t value);
  std::vector<uint8_t> Finish();

 private:
  void EncodeRange(uint32_t start, uint32_t freq);
  void ShiftLow();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  std::vector<uint8_t> out_;
  bool finished_ = false;
};

class RangeDecoder {
 public:
  // Throws CorruptStreamError if the stream is too short to hold the
  // initial code word.
  explicit RangeDecoder(std::span<const uint8_t> stream);
  int32_t Decode(const CdfTable& table);
  uint32_t DecodeRaw16();
  // Bytes consumed so far.
  size_t position() const { return pos_; }
  // Throws CorruptStreamError unless every byte was consumed.
  void CheckFullyConsumed() const;

 private:
  uint8_t NextByte();
  void Normalize();
  uint32_t Target();

  std::span<const uint8_t> stream_;
  size_t pos_ = 0;
  uint32_t code_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
};

std::vector<uint8_t> EncodeSymbols(std::span<const int32_t> symbols,
                                   std::span<const CdfTable> tables);
std::vector<int32_t> DecodeSymbols(std::span<const uint8_t> stream,
                                   std::span<const CdfTable> tables, size_t n);

// Sum of CostBits over a symbol sequence: the modeled size the coder is
// measured against.
double IdealBits(std::span<const int32_t> symbols,
                 std::span<const CdfTable> tables);

}  // namespace c2f

#endif  // C2F_RANGE_CODER_H_
