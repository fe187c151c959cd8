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

#include "emcomm/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace emcomm {

void ParameterSet::Add(std::string name, Var param) {
  if (Find(name)) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  entries_.emplace_back(std::move(name), std::move(param));
}

void ParameterSet::Append(const ParameterSet& other) {
  for (const auto& [name, var] : other.entries()) Add(name, var);
}

std::vector<Var> ParameterSet::vars() const {
  std::vector<Var> out;
  out.reserve(entries_.size());
  for (const auto& entry : entries_) out.push_back(entry.second);
  return out;
}

Var ParameterSet::Find(std::string_view name) const {
  for (const auto& [n, var] : entries_) {
    if (n == name) return var;
  }
  return nullptr;
}

size_t ParameterSet::TotalSize() const {
  size_t n = 0;
  for (const auto& entry : entries_) n += entry.second->value().size();
  return n;
}

void ParameterSet::ZeroGrad() const {
  for (const auto& entry : entries_) entry.second->ZeroGrad();
}

DenseArray InitUniform(Shape shape, size_t fan_in, RngStream& rng) {
  if (fan_in == 0) throw std::invalid_argument("InitUniform: fan_in is zero");
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  DenseArray out(std::move(shape));
  for (double& w : out.data()) w = rng.Uniform(-bound, bound);
  return out;
}

LinearLayer::LinearLayer(size_t in, size_t out, RngStream& rng)
    : in_(in),
      out_(out),
      weight_(Parameter(InitUniform({in, out}, in, rng))),
      bias_(Parameter(DenseArray(Shape{out}, 0.0))) {}

Var LinearLayer::Forward(const Var& x) const {
  return Add(MatMul(x, weight_), bias_);
}

void LinearLayer::Register(ParameterSet& params,
                           const std::string& prefix) const {
  params.Add(prefix + ".weight", weight_);
  params.Add(prefix + ".bias", bias_);
}

RnnCell::RnnCell(size_t in, size_t hidden, RngStream& rng)
    : in_(in),
      hidden_(hidden),
      w_ih_(Parameter(InitUniform({in, hidden}, in, rng))),
      w_hh_(Parameter(InitUniform({hidden, hidden}, hidden, rng))),
      b_ih_(Parameter(DenseArray(Shape{hidden}, 0.0))),
      b_hh_(Parameter(DenseArray(Shape{hidden}, 0.0))) {}

Var RnnCell::Step(const Var& x, const Var& h) const {
  Var from_input = Add(MatMul(x, w_ih_), b_ih_);
  Var from_hidden = Add(MatMul(h, w_hh_), b_hh_);
  // The single-row operand, if any, goes second so it broadcasts.
  if (from_input->value().rows() > from_hidden->value().rows()) {
    return Tanh(Add(from_input, from_hidden));
  }
  return Tanh(Add(from_hidden, from_input));
}

void RnnCell::Register(ParameterSet& params, const std::string& prefix) const {
  params.Add(prefix + ".w_ih", w_ih_);
  params.Add(prefix + ".w_hh", w_hh_);
  params.Add(prefix + ".b_ih", b_ih_);
  params.Add(prefix + ".b_hh", b_hh_);
}

EmbeddingTable::EmbeddingTable(size_t vocab, size_t dim, RngStream& rng)
    : vocab_(vocab),
      dim_(dim),
      table_(Parameter(InitUniform({vocab, dim}, dim, rng))) {}

Var EmbeddingTable::Lookup(std::span<const int> symbols) const {
  return RowSelect(table_, symbols);
}

Var EmbeddingTable::LookupSoft(const Var& p) const {
  return MatMul(p, table_);
}

void EmbeddingTable::Register(ParameterSet& params,
                              const std::string& prefix) const {
  params.Add(prefix + ".table", table_);
}

}  // namespace emcomm
