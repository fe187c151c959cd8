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

// Reverse-mode automatic differentiation over DenseArray values.
//
// A graph is built implicitly by calling the operations below on Var handles.
// Parameters are long-lived leaves whose gradients accumulate across calls to
// Backward() until cleared; every other node belongs to the graph of a single
// forward pass and is released when the last handle to it goes away.
//
// Graphs are not thread-safe. Each worker builds and differentiates its own.

#ifndef EMCOMM_AUTODIFF_HPP_
#define EMCOMM_AUTODIFF_HPP_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "emcomm/dense_array.hpp"

namespace emcomm {

class Node;
using Var = std::shared_ptr<Node>;

class Node {
 public:
  using BackwardFn = std::function<void(Node&)>;

  Node(std::string op, DenseArray value, std::vector<Var> parents,
       BackwardFn backward, bool requires_grad);

  const std::string& op() const { return op_; }
  const DenseArray& value() const { return value_; }
  DenseArray& mutable_value() { return value_; }
  // Same shape as value(); zero until a backward pass reaches the node.
  const DenseArray& grad() const;
  DenseArray& mutable_grad();
  bool requires_grad() const { return requires_grad_; }
  bool is_leaf() const { return parents_.empty(); }
  const std::vector<Var>& parents() const { return parents_; }
  const Var& parent(size_t i) const { return parents_[i]; }

  void ZeroGrad();
  void RunBackward() {
    if (backward_) backward_(*this);
  }

 private:
  std::string op_;
  DenseArray value_;
  mutable DenseArray grad_;
  mutable bool grad_ready_ = false;
  std::vector<Var> parents_;
  BackwardFn backward_;
  bool requires_grad_;
};

// Leaves.
Var Parameter(DenseArray value);
Var Constant(DenseArray value);

// While alive, operations on this thread record no backward rules.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  bool previous_;
};

// Matrix product of [m x k] and [k x n].
Var MatMul(const Var& a, const Var& b);
// Elementwise sum. `b` may also be a single row ([n] or [1 x n]) that is
// broadcast over the rows of an [m x n] `a`.
Var Add(const Var& a, const Var& b);
// Elementwise product of equal shapes.
Var Mul(const Var& a, const Var& b);
Var Scale(const Var& a, double factor);
Var Tanh(const Var& a);
Var Log(const Var& a);
Var Exp(const Var& a);
// Concatenation along the last axis; all inputs share the row count.
Var Concat(std::span<const Var> inputs);
// Gathers rows of a rank-2 table: out[i] = table[indices[i]].
Var RowSelect(const Var& table, std::span<const int> indices);
// Sum of all entries, as a scalar.
Var Sum(const Var& a);
// [m x n] -> [m x 1].
Var SumLastAxis(const Var& a);
Var Softmax(const Var& a);
Var LogSoftmax(const Var& a);
// Forward value `hard`, gradient routed unchanged into `soft`.
Var StraightThrough(DenseArray hard, const Var& soft);

// Populates d(root)/d(node) for every node reachable from a scalar root.
// Gradients of non-leaf nodes are reset first; leaf gradients accumulate.
void Backward(const Var& root);

}  // namespace emcomm

#endif  // EMCOMM_AUTODIFF_HPP_
