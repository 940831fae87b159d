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

#include "c2f/range_coder.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "c2f/errors.h"

namespace c2f {
namespace {

constexpr uint32_t kTopValue = 1u << 24;

}  // namespace

double CdfTable::CostBits(int32_t s) const {
  const int32_t bin = Contains(s) ? s - smin : num_bins() - 1;
  double bits = kProbBits - std::log2(static_cast<double>(Frequency(bin)));
  if (!Contains(s)) bits += 32.0;
  return bits;
}

void CdfTable::Validate() const {
  if (cdf.size() < 2) throw ContractError("cdf table needs at least one bin");
  if (cdf.front() != 0 || cdf.back() != kProbTotal) {
    throw ContractError("cdf table must run from 0 to 65536");
  }
  for (size_t i = 1; i < cdf.size(); ++i) {
    if (cdf[i] <= cdf[i - 1]) {
      throw ContractError("cdf table bin " + std::to_string(i - 1) +
                          " has zero frequency");
    }
  }
  if (escape && cdf.size() < 3) {
    throw ContractError("escape table needs at least one regular symbol");
  }
}

void RangeEncoder::ShiftLow() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t temp = cache_;
    do {
      out_.push_back(static_cast<uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::EncodeRange(uint32_t start, uint32_t freq) {
  const uint32_t r = range_ >> kProbBits;
  low_ += static_cast<uint64_t>(r) * start;
  range_ = r * freq;
  while (range_ < kTopValue) {
    range_ <<= 8;
    ShiftLow();
  }
}

void RangeEncoder::Encode(int32_t symbol, const CdfTable& table) {
  if (finished_) throw ContractError("range encoder already finished");
  if (table.Contains(symbol)) {
    const int32_t bin = symbol - table.smin;
    EncodeRange(table.cdf[bin], table.Frequency(bin));
    return;
  }
  if (!table.escape) {
    throw ContractError("symbol " + std::to_string(symbol) +
                        " outside alphabet [" + std::to_string(table.smin) +
                        ", " + std::to_string(table.smax()) +
                        "] and table has no escape bin");
  }
  const int32_t bin = table.num_bins() - 1;
  EncodeRange(table.cdf[bin], table.Frequency(bin));
  const uint32_t raw = static_cast<uint32_t>(symbol);
  EncodeRaw16(raw >> 16);
  EncodeRaw16(raw & 0xFFFFu);
}

void RangeEncoder::EncodeRaw16(uint32_t value) {
  if (value >= kProbTotal) throw ContractError("raw value exceeds 16 bits");
  EncodeRange(value, 1);
}

std::vector<uint8_t> RangeEncoder::Finish() {
  if (!finished_) {
    for (int i = 0; i < 5; ++i) ShiftLow();
    finished_ = true;
  }
  return out_;
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> stream) : stream_(stream) {
  if (stream_.size() < 5) {
    throw CorruptStreamError("range stream shorter than 5 bytes", stream_.size());
  }
  if (stream_[0] != 0) {
    throw CorruptStreamError("range stream lead byte must be zero", 0);
  }
  pos_ = 1;
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | NextByte();
}

uint8_t RangeDecoder::NextByte() {
  if (pos_ >= stream_.size()) {
    throw CorruptStreamError("range stream exhausted early", pos_);
  }
  return stream_[pos_++];
}

void RangeDecoder::Normalize() {
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | NextByte();
    range_ <<= 8;
  }
}

uint32_t RangeDecoder::Target() {
  const uint32_t r = range_ >> kProbBits;
  const uint32_t v = code_ / r;
  if (v >= kProbTotal) {
    throw CorruptStreamError("range code word out of bounds", pos_);
  }
  return v;
}

int32_t RangeDecoder::Decode(const CdfTable& table) {
  const uint32_t v = Target();
  // First cdf entry strictly greater than v; its predecessor is the bin.
  const auto it = std::upper_bound(table.cdf.begin(), table.cdf.end(), v);
  const int32_t bin = static_cast<int32_t>(it - table.cdf.begin()) - 1;
  const uint32_t r = range_ >> kProbBits;
  code_ -= r * table.cdf[bin];
  range_ = r * table.Frequency(bin);
  Normalize();
  if (table.escape && bin == table.num_bins() - 1) {
    const uint32_t hi = DecodeRaw16();
    const uint32_t lo = DecodeRaw16();
    const int32_t value = static_cast<int32_t>((hi << 16) | lo);
    if (table.Contains(value)) {
      throw CorruptStreamError("escaped value lies inside the alphabet", pos_);
    }
    return value;
  }
  return table.smin + bin;
}

uint32_t RangeDecoder::DecodeRaw16() {
  const uint32_t v = Target();
  const uint32_t r = range_ >> kProbBits;
  code_ -= r * v;
  range_ = r;
  Normalize();
  return v;
}

void RangeDecoder::CheckFullyConsumed() const {
  if (pos_ != stream_.size()) {
    throw CorruptStreamError(
        "range stream has " + std::to_string(stream_.size() - pos_) +
            " trailing bytes",
        pos_);
  }
}

std::vector<uint8_t> EncodeSymbols(std::span<const int32_t> symbols,
                                   std::span<const CdfTable> tables) {
  if (symbols.size() != tables.size()) {
    throw ContractError("encode: " + std::to_string(symbols.size()) +
                        " symbols but " + std::to_string(tables.size()) +
                        " tables");
  }
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i) enc.Encode(symbols[i], tables[i]);
  return enc.Finish();
}

std::vector<int32_t> DecodeSymbols(std::span<const uint8_t> stream,
                                   std::span<const CdfTable> tables, size_t n) {
  if (tables.size() != n) {
    throw ContractError("decode: " + std::to_string(n) + " symbols but " +
                        std::to_string(tables.size()) + " tables");
  }
  RangeDecoder dec(stream);
  std::vector<int32_t> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = dec.Decode(tables[i]);
  dec.CheckFullyConsumed();
  return out;
}

double IdealBits(std::span<const int32_t> symbols,
                 std::span<const CdfTable> tables) {
  double bits = 0.0;
  for (size_t i = 0; i < symbols.size(); ++i) bits += tables[i].CostBits(symbols[i]);
  return bits;
}

}  // namespace c2f
