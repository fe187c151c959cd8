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

#include "emcomm/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emcomm {

double Entropy(std::span<const int64_t> counts) {
  int64_t total = 0;
  for (int64_t c : counts) {
    if (c < 0) throw std::invalid_argument("Entropy: negative count");
    total += c;
  }
  if (total == 0) throw std::invalid_argument("Entropy: all counts are zero");
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (int64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  // A single occupied cell gives -1 * log2(1) = -0.0.
  return h + 0.0;
}

JointCounts::JointCounts(size_t rows, size_t cols)
    : rows_(rows), cols_(cols), counts_(rows * cols, 0) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("JointCounts: dimensions must be positive");
  }
}

JointCounts JointCounts::FromTable(
    const std::vector<std::vector<int64_t>>& table) {
  if (table.empty()) throw std::invalid_argument("JointCounts: empty table");
  JointCounts joint(table.size(), table[0].size());
  for (size_t r = 0; r < table.size(); ++r) {
    if (table[r].size() != joint.cols()) {
      throw std::invalid_argument("JointCounts: ragged table");
    }
    for (size_t c = 0; c < table[r].size(); ++c) joint.Add(r, c, table[r][c]);
  }
  return joint;
}

void JointCounts::Add(size_t row, size_t col, int64_t n) {
  if (row >= rows_ || col >= cols_) {
    throw std::out_of_range("JointCounts: cell out of range");
  }
  if (n < 0 || counts_[row * cols_ + col] + n < 0) {
    throw std::invalid_argument("JointCounts: counts must stay non-negative");
  }
  counts_[row * cols_ + col] += n;
  total_ += n;
}

std::vector<int64_t> JointCounts::RowTotals() const {
  std::vector<int64_t> totals(rows_, 0);
  for (size_t r = 0; r < rows_; ++r) {
    for (int64_t c : row(r)) totals[r] += c;
  }
  return totals;
}

std::vector<int64_t> JointCounts::ColTotals() const {
  std::vector<int64_t> totals(cols_, 0);
  for (size_t r = 0; r < rows_; ++r) {
    for (size_t c = 0; c < cols_; ++c) totals[c] += at(r, c);
  }
  return totals;
}

JointCounts JointCounts::Transposed() const {
  JointCounts out(cols_, rows_);
  for (size_t r = 0; r < rows_; ++r) {
    for (size_t c = 0; c < cols_; ++c) {
      if (at(r, c) > 0) out.Add(c, r, at(r, c));
    }
  }
  return out;
}

double ConditionalEntropy(const JointCounts& joint) {
  if (joint.total() == 0) {
    throw std::invalid_argument("ConditionalEntropy: empty table");
  }
  const double n = static_cast<double>(joint.total());
  const std::vector<int64_t> row_totals = joint.RowTotals();
  double h = 0.0;
  for (size_t r = 0; r < joint.rows(); ++r) {
    if (row_totals[r] == 0) continue;
    h += static_cast<double>(row_totals[r]) / n * Entropy(joint.row(r));
  }
  return h;
}

double MutualInformation(const JointCounts& joint) {
  if (joint.total() == 0) {
    throw std::invalid_argument("MutualInformation: empty table");
  }
  // Non-negative in exact arithmetic; clamp rounding residue.
  return std::max(0.0, Entropy(joint.ColTotals()) - ConditionalEntropy(joint));
}

}  // namespace emcomm
