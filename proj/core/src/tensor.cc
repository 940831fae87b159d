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

#include "c2f/tensor.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "c2f/errors.h"
#include "c2f/random.h"

namespace c2f {

std::string Shape::ToString() const {
  std::ostringstream os;
  os << "(" << b << "," << h << "," << w << "," << c << ")";
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(shape) {
  if (shape.b < 0 || shape.h < 0 || shape.w < 0 || shape.c < 0) {
    throw ContractError("negative tensor dimension " + shape.ToString());
  }
  data_.assign(static_cast<size_t>(shape.size()), fill);
}

Tensor::Tensor(Shape shape, std::span<const float> values) : Tensor(shape) {
  if (static_cast<int64_t>(values.size()) != shape.size()) {
    throw ContractError("tensor data length " + std::to_string(values.size()) +
                        " does not match shape " + shape.ToString());
  }
  std::copy(values.begin(), values.end(), data_.begin());
}

void Tensor::Fill(float v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::AllFinite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::Reshaped(Shape shape) const {
  if (shape.size() != size()) {
    throw ContractError("cannot reshape " + shape_.ToString() + " to " +
                        shape.ToString());
  }
  return Tensor(shape, values());
}

bool Tensor::BitwiseEqual(const Tensor& other) const {
  return shape_ == other.shape_ &&
         std::memcmp(data_.data(), other.data_.data(),
                     data_.size() * sizeof(float)) == 0;
}

void CheckSameShape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw ContractError(std::string(what) + ": shape mismatch " +
                        a.ToString() + " vs " + b.ToString());
  }
}

double Rng::Normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = Uniform();
  } while (u1 <= 0.0);
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(t);
  have_spare_ = true;
  return r * std::cos(t);
}

const char* ToString(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::kTruncated:
      return "truncated";
    case FormatErrorKind::kBadMagic:
      return "bad magic";
    case FormatErrorKind::kVersionMismatch:
      return "version mismatch";
    case FormatErrorKind::kBadHeader:
      return "bad header";
    case FormatErrorKind::kChecksumMismatch:
      return "checksum mismatch";
    case FormatErrorKind::kModelMismatch:
      return "model mismatch";
  }
  return "format error";
}

}  // namespace c2f
