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

// Plug-in (maximum-likelihood) information measures over empirical counts.
// All results are in bits.

#ifndef EMCOMM_INFOTHEORY_HPP_
#define EMCOMM_INFOTHEORY_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace emcomm {

// -sum p log2 p over the nonzero cells. Throws std::invalid_argument if
// there is no positive count or any count is negative.
double Entropy(std::span<const int64_t> counts);

// Contingency table of (message, feature value) occurrences.
class JointCounts {
 public:
  JointCounts(size_t rows, size_t cols);
  static JointCounts FromTable(const std::vector<std::vector<int64_t>>& table);

  void Add(size_t row, size_t col, int64_t n = 1);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  int64_t at(size_t row, size_t col) const { return counts_[row * cols_ + col]; }
  std::span<const int64_t> row(size_t r) const {
    return {counts_.data() + r * cols_, cols_};
  }
  int64_t total() const { return total_; }
  std::vector<int64_t> RowTotals() const;
  std::vector<int64_t> ColTotals() const;
  JointCounts Transposed() const;

 private:
  size_t rows_, cols_;
  std::vector<int64_t> counts_;
  int64_t total_ = 0;
};

// H(column | row) = sum_r p(r) H(column | row = r).
double ConditionalEntropy(const JointCounts& joint);

// I(row; column) = H(column) - H(column | row).
double MutualInformation(const JointCounts& joint);

}  // namespace emcomm

#endif  // EMCOMM_INFOTHEORY_HPP_
