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

#ifndef EMCOMM_LAYERS_HPP_
#define EMCOMM_LAYERS_HPP_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emcomm/autodiff.hpp"
#include "emcomm/rng.hpp"

namespace emcomm {

// Named, ordered collection of parameter leaves.
class ParameterSet {
 public:
  void Add(std::string name, Var param);
  void Append(const ParameterSet& other);

  const std::vector<std::pair<std::string, Var>>& entries() const {
    return entries_;
  }
  std::vector<Var> vars() const;
  // nullptr when absent.
  Var Find(std::string_view name) const;
  size_t TotalSize() const;
  void ZeroGrad() const;

 private:
  std::vector<std::pair<std::string, Var>> entries_;
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
DenseArray InitUniform(Shape shape, size_t fan_in, RngStream& rng);

// y = x W + b, with W stored [in x out] so rows of x map to rows of y.
class LinearLayer {
 public:
  LinearLayer(size_t in, size_t out, RngStream& rng);

  Var Forward(const Var& x) const;
  void Register(ParameterSet& params, const std::string& prefix) const;

  size_t in() const { return in_; }
  size_t out() const { return out_; }
  const Var& weight() const { return weight_; }
  const Var& bias() const { return bias_; }

 private:
  size_t in_, out_;
  Var weight_;
  Var bias_;
};

// h' = tanh(x W_ih + b_ih + h W_hh + b_hh). `x` may be a single row that is
// shared by every row of `h`.
class RnnCell {
 public:
  RnnCell(size_t in, size_t hidden, RngStream& rng);

  Var Step(const Var& x, const Var& h) const;
  void Register(ParameterSet& params, const std::string& prefix) const;

  size_t in() const { return in_; }
  size_t hidden() const { return hidden_; }

 private:
  size_t in_, hidden_;
  Var w_ih_, w_hh_, b_ih_, b_hh_;
};

class EmbeddingTable {
 public:
  EmbeddingTable(size_t vocab, size_t dim, RngStream& rng);

  // Rows by symbol index.
  Var Lookup(std::span<const int> symbols) const;
  // Probability-weighted rows: p [B x vocab] times the table.
  Var LookupSoft(const Var& p) const;
  void Register(ParameterSet& params, const std::string& prefix) const;

  size_t vocab() const { return vocab_; }
  size_t dim() const { return dim_; }
  const Var& table() const { return table_; }

 private:
  size_t vocab_, dim_;
  Var table_;
};

}  // namespace emcomm

#endif  // EMCOMM_LAYERS_HPP_
