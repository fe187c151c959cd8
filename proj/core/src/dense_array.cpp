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

#include "emcomm/dense_array.hpp"

#include <algorithm>
#include <cmath>

namespace emcomm {

std::string ShapeToString(const Shape& shape) {
  std::string out = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

size_t ShapeProduct(const Shape& shape) {
  size_t n = 1;
  for (size_t d : shape) {
    if (d == 0) {
      throw ShapeError("shape " + ShapeToString(shape) +
                       " has a zero dimension");
    }
    n *= d;
  }
  return n;
}

DenseArray::DenseArray(Shape shape, double fill)
    : shape_(std::move(shape)), data_(ShapeProduct(shape_), fill) {}

DenseArray::DenseArray(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (ShapeProduct(shape_) != data_.size()) {
    throw ShapeError("shape " + ShapeToString(shape_) + " needs " +
                     std::to_string(ShapeProduct(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

double DenseArray::item() const {
  if (data_.size() != 1) {
    throw ShapeError("item() on non-scalar array of shape " +
                     ShapeToString(shape_));
  }
  return data_[0];
}

bool DenseArray::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double x) { return std::isfinite(x); });
}

void DenseArray::Fill(double value) {
  std::fill(data_.begin(), data_.end(), value);
}

DenseArray DenseArray::Reshaped(Shape shape) const {
  if (ShapeProduct(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + ShapeToString(shape_) + " to " +
                     ShapeToString(shape));
  }
  DenseArray out = *this;
  out.shape_ = std::move(shape);
  return out;
}

}  // namespace emcomm
