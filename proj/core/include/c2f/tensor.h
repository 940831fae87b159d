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

#ifndef C2F_TENSOR_H_
#define C2F_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace c2f {

// Dimensions of a 4-D (batch, height, width, channel) tensor.
struct Shape {
  int64_t b = 0;
  int64_t h = 0;
  int64_t w = 0;
  int64_t c = 0;

  int64_t size() const { return b * h * w * c; }
  int64_t pixels() const { return b * h * w; }
  bool operator==(const Shape&) const = default;
  std::string ToString() const;
};

template <typename T, size_t Alignment>
struct AlignedAllocator {
  using value_type = T;
  template <typename U>
  struct rebind {
    using other = AlignedAllocator<U, Alignment>;
  };
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U, Alignment>&) {}
  T* allocate(size_t n) {
    return static_cast<T*>(
        ::operator new(n * sizeof(T), std::align_val_t(Alignment)));
  }
  void deallocate(T* p, size_t) {
    ::operator delete(p, std::align_val_t(Alignment));
  }
  template <typename U>
  bool operator==(const AlignedAllocator<U, Alignment>&) const {
    return true;
  }
};

// Dense row-major float32 tensor in (b, h, w, c) order. Plain value type; the
// autodiff tape keeps gradients separately.
class Tensor {
 public:
  using Storage = std::vector<float, AlignedAllocator<float, 64>>;

  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::span<const float> values);

  const Shape& shape() const { return shape_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return {data_.data(), data_.size()}; }
  std::span<const float> values() const { return {data_.data(), data_.size()}; }

  float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  int64_t Offset(int64_t b, int64_t y, int64_t x, int64_t ch) const {
    return ((b * shape_.h + y) * shape_.w + x) * shape_.c + ch;
  }
  float& at(int64_t b, int64_t y, int64_t x, int64_t ch) {
    return data_[static_cast<size_t>(Offset(b, y, x, ch))];
  }
  float at(int64_t b, int64_t y, int64_t x, int64_t ch) const {
    return data_[static_cast<size_t>(Offset(b, y, x, ch))];
  }

  void Fill(float v);
  bool AllFinite() const;
  // Returns a tensor sharing no storage with this one but holding the same
  // values under a new shape of equal element count.
  Tensor Reshaped(Shape shape) const;

  bool BitwiseEqual(const Tensor& other) const;

 private:
  Shape shape_;
  Storage data_;
};

// Throws ContractError unless `a == b`.
void CheckSameShape(const Shape& a, const Shape& b, const char* what);

}  // namespace c2f

#endif  // C2F_TENSOR_H_
