// Copyright 2026 The emcomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMCOMM_DENSE_ARRAY_HPP_
#define EMCOMM_DENSE_ARRAY_HPP_

#include <cstddef>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace emcomm {

using Shape = std::vector<size_t>;

std::string ShapeToString(const Shape& shape);

// Raised for operand shapes that do not conform to an operation's rules.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// 64-byte aligned allocation. Vectorized reductions then see the same
// alignment on every run, which keeps results bit-reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlignment));
  }
  void deallocate(T* p, size_t) { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using AlignedVector = std::vector<double, AlignedAllocator<double>>;

// Row-major array of doubles. Rank 0 is a scalar; all dimensions are
// positive.
class DenseArray {
 public:
  DenseArray() : data_(1, 0.0) {}
  explicit DenseArray(Shape shape, double fill = 0.0);
  DenseArray(Shape shape, std::vector<double> data);

  static DenseArray Scalar(double value) { return DenseArray(Shape{}, value); }
  static DenseArray Matrix(size_t rows, size_t cols, double fill = 0.0) {
    return DenseArray(Shape{rows, cols}, fill);
  }

  const Shape& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return data_.size(); }
  // Last dimension, and the product of the leading ones. A rank-1 array is
  // one row; a scalar is 1 x 1.
  size_t cols() const { return shape_.empty() ? 1 : shape_.back(); }
  size_t rows() const { return size() / cols(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  AlignedVector& storage() { return data_; }
  const AlignedVector& storage() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }
  double& at(size_t r, size_t c) { return data_[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data_[r * cols() + c]; }
  std::span<double> row(size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }

  double item() const;
  bool AllFinite() const;
  void Fill(double value);
  DenseArray Reshaped(Shape shape) const;

  friend bool operator==(const DenseArray&, const DenseArray&) = default;

 private:
  Shape shape_;
  AlignedVector data_;
};

size_t ShapeProduct(const Shape& shape);

}  // namespace emcomm

#endif  // EMCOMM_DENSE_ARRAY_HPP_
