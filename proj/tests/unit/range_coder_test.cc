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

#include <cmath>
#include <vector>

#include "c2f/entropy.h"
#include "c2f/errors.h"
#include "c2f/random.h"
#include "c2f/range_coder.h"
#include "doctest.h"

namespace c2f {
namespace {

CdfTable Uniform(int32_t smin, int32_t bins) {
  CdfTable t;
  t.smin = smin;
  for (int32_t i = 0; i <= bins; ++i) {
    t.cdf.push_back(static_cast<uint32_t>(int64_t{kProbTotal} * i / bins));
  }
  return t;
}

std::vector<int32_t> Roundtrip(const std::vector<int32_t>& sym,
                               const std::vector<CdfTable>& tables,
                               std::vector<uint8_t>* bytes = nullptr) {
  std::vector<uint8_t> b = EncodeSymbols(sym, tables);
  if (bytes != nullptr) *bytes = b;
  return DecodeSymbols(b, tables, sym.size());
}

TEST_CASE("empty stream is tiny and decodes to nothing") {
  const std::vector<uint8_t> b = EncodeSymbols({}, {});
  CHECK(b.size() <= 8);
  CHECK(DecodeSymbols(b, {}, 0).empty());
}

TEST_CASE("uniform 256-bin tables cost one byte per symbol") {
  Rng rng(1);
  std::vector<int32_t> sym(1000);
  for (auto& s : sym) s = static_cast<int32_t>(rng.Below(256));
  const std::vector<CdfTable> tables(sym.size(), Uniform(0, 256));
  std::vector<uint8_t> bytes;
  CHECK(Roundtrip(sym, tables, &bytes) == sym);
  CHECK(bytes.size() >= 1000 - 8);
  CHECK(bytes.size() <= 1000 + 8);
}

TEST_CASE("encoding is deterministic") {
  Rng rng(2);
  std::vector<int32_t> sym(5000);
  std::vector<CdfTable> tables;
  for (auto& s : sym) {
    const double mu = rng.Uniform(-20, 20), sigma = rng.Uniform(0.1, 10);
    tables.push_back(BuildCdfTable(mu, sigma));
    s = static_cast<int32_t>(std::lround(mu + sigma * rng.Normal()));
  }
  CHECK(EncodeSymbols(sym, tables) == EncodeSymbols(sym, tables));
}

TEST_CASE("random symbols under random tables roundtrip") {
  Rng rng(3);
  const size_t n = 100000;
  std::vector<int32_t> sym(n);
  std::vector<CdfTable> tables(n);
  for (size_t i = 0; i < n; ++i) {
    const double mu = rng.Uniform(-60, 60), sigma = std::exp(rng.Uniform(-4, 5));
    BuildCdfTable(mu, sigma, kSymbolMin, kSymbolMax, tables[i]);
    sym[i] = static_cast<int32_t>(std::lround(mu + sigma * rng.Normal()));
  }
  std::vector<uint8_t> bytes;
  CHECK(Roundtrip(sym, tables, &bytes) == sym);
  const double ideal = IdealBits(sym, tables);
  CHECK(8.0 * bytes.size() <= ideal * 1.001 + 256);
}

TEST_CASE("gaussian sources at several scales") {
  for (double sigma : {0.05, 1.0, 30.0}) {
    Rng rng(4);
    const CdfTable t = BuildCdfTable(0.0, sigma);
    std::vector<int32_t> sym(20000);
    for (auto& s : sym) s = static_cast<int32_t>(std::lround(sigma * rng.Normal()));
    const std::vector<CdfTable> tables(sym.size(), t);
    std::vector<uint8_t> bytes;
    CAPTURE(sigma);
    CHECK(Roundtrip(sym, tables, &bytes) == sym);
    CHECK(8.0 * bytes.size() <= IdealBits(sym, tables) * 1.001 + 256);
  }
}

TEST_CASE("heavily skewed table") {
  CdfTable t;
  t.smin = 0;
  t.cdf = {0, 65281, 65536};
  CHECK_NOTHROW(t.Validate());
  Rng rng(5);
  std::vector<int32_t> sym(50000);
  for (auto& s : sym) s = rng.Below(256) == 0 ? 1 : 0;
  const std::vector<CdfTable> tables(sym.size(), t);
  std::vector<uint8_t> bytes;
  CHECK(Roundtrip(sym, tables, &bytes) == sym);
  CHECK(8.0 * bytes.size() <= IdealBits(sym, tables) * 1.001 + 256);
}

TEST_CASE("escaped symbols carry their full value") {
  const CdfTable t = BuildCdfTable(0.0, 2.0);
  const std::vector<int32_t> sym = {0,    kSymbolMax + 1, kSymbolMin - 1, 1 << 20,
                                    -(1 << 24), 3,  INT32_MAX,      INT32_MIN + 1};
  const std::vector<CdfTable> tables(sym.size(), t);
  CHECK(Roundtrip(sym, tables) == sym);
  CHECK(t.CostBits(5000) >= 32.0);
}

TEST_CASE("out of alphabet without escape bin is a contract error") {
  const std::vector<CdfTable> tables(1, Uniform(0, 4));
  CHECK_THROWS_AS(EncodeSymbols(std::vector<int32_t>{4}, tables), ContractError);
  CHECK_THROWS_AS(EncodeSymbols(std::vector<int32_t>{0, 1}, tables), ContractError);
}

TEST_CASE("malformed tables are rejected") {
  CdfTable t;
  t.cdf = {0, 100, 100, 65536};
  CHECK_THROWS_AS(t.Validate(), ContractError);
  t.cdf = {0, 100, 65535};
  CHECK_THROWS_AS(t.Validate(), ContractError);
}

TEST_CASE("truncated and padded streams are corrupt") {
  Rng rng(6);
  std::vector<int32_t> sym(2000);
  for (auto& s : sym) s = static_cast<int32_t>(rng.Below(256));
  const std::vector<CdfTable> tables(sym.size(), Uniform(0, 256));
  std::vector<uint8_t> bytes = EncodeSymbols(sym, tables);
  std::vector<uint8_t> cut(bytes.begin(), bytes.begin() + bytes.size() / 2);
  CHECK_THROWS_AS(DecodeSymbols(cut, tables, sym.size()), CorruptStreamError);
  std::vector<uint8_t> tiny(bytes.begin(), bytes.begin() + 3);
  CHECK_THROWS_AS(DecodeSymbols(tiny, tables, sym.size()), CorruptStreamError);
  std::vector<uint8_t> longer = bytes;
  longer.push_back(0);
  CHECK_THROWS_AS(DecodeSymbols(longer, tables, sym.size()), CorruptStreamError);
}

}  // namespace
}  // namespace c2f
