// Copyright 2026 The voxedge Authors. All Rights Reserved.
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

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace voxedge::ad {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

/// Dense row-major array. A rank-0 shape holds one element.
template <typename T>
class NdArray {
 public:
  using value_type = T;

  NdArray() = default;
  explicit NdArray(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
    check_extents();
  }
  NdArray(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents();
    if (data_.size() != shape_size(shape_)) {
      throw std::invalid_argument("NdArray: data length " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_string(shape_));
    }
  }

  static NdArray scalar(T v) { return NdArray(Shape{}, std::vector<T>{v}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  T item() const {
    if (data_.size() != 1) throw std::invalid_argument("NdArray::item on non-scalar");
    return data_[0];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  NdArray reshaped(Shape s) const {
    if (shape_size(s) != data_.size()) {
      throw std::invalid_argument("reshape " + shape_string(shape_) + " -> " + shape_string(s));
    }
    return NdArray(std::move(s), data_);
  }

  template <typename U>
  NdArray<U> cast() const {
    return NdArray<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const NdArray&, const NdArray&) = default;

 private:
  void check_extents() const {
    for (auto e : shape_) {
      if (e == 0) throw std::invalid_argument("NdArray: zero extent in " + shape_string(shape_));
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

}  // namespace voxedge::ad
