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

#include "emcomm/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace emcomm {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

MatrixMap AsMatrix(DenseArray& a) {
  return MatrixMap(a.data().data(), static_cast<Eigen::Index>(a.rows()),
                   static_cast<Eigen::Index>(a.cols()));
}
ConstMatrixMap AsMatrix(const DenseArray& a) {
  return ConstMatrixMap(a.data().data(), static_cast<Eigen::Index>(a.rows()),
                        static_cast<Eigen::Index>(a.cols()));
}
Eigen::Map<Eigen::ArrayXd> AsArray(DenseArray& a) {
  return {a.data().data(), static_cast<Eigen::Index>(a.size())};
}
Eigen::Map<const Eigen::ArrayXd> AsArray(const DenseArray& a) {
  return {a.data().data(), static_cast<Eigen::Index>(a.size())};
}

thread_local bool g_no_grad = false;

[[noreturn]] void ThrowShape(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shapes " + ShapeToString(a) + " and " +
                   ShapeToString(b) + " do not conform");
}

Var MakeNode(const char* op, DenseArray value, std::vector<Var> parents,
             Node::BackwardFn backward) {
  bool requires_grad = false;
  if (!g_no_grad) {
    requires_grad = std::any_of(parents.begin(), parents.end(),
                                [](const Var& p) { return p->requires_grad(); });
  }
  if (!requires_grad) {
    parents.clear();
    backward = nullptr;
  }
  return std::make_shared<Node>(op, std::move(value), std::move(parents),
                                std::move(backward), requires_grad);
}

// Gradient buffer of parent `i`, or nullptr if it does not need one.
DenseArray* ParentGrad(Node& self, size_t i) {
  const Var& p = self.parent(i);
  return p->requires_grad() ? &p->mutable_grad() : nullptr;
}

bool IsRowOf(const DenseArray& row, const DenseArray& matrix) {
  return row.size() == matrix.cols() &&
         (row.rank() == 1 || (row.rank() == 2 && row.shape()[0] == 1));
}

}  // namespace

Node::Node(std::string op, DenseArray value, std::vector<Var> parents,
           BackwardFn backward, bool requires_grad)
    : op_(std::move(op)),
      value_(std::move(value)),
      parents_(std::move(parents)),
      backward_(std::move(backward)),
      requires_grad_(requires_grad) {}

const DenseArray& Node::grad() const {
  if (!grad_ready_ || grad_.shape() != value_.shape()) {
    grad_ = DenseArray(value_.shape(), 0.0);
    grad_ready_ = true;
  }
  return grad_;
}

DenseArray& Node::mutable_grad() {
  grad();
  return grad_;
}

void Node::ZeroGrad() {
  if (grad_ready_) grad_.Fill(0.0);
}

Var Parameter(DenseArray value) {
  return std::make_shared<Node>("parameter", std::move(value),
                                std::vector<Var>{}, nullptr, true);
}

Var Constant(DenseArray value) {
  return std::make_shared<Node>("constant", std::move(value),
                                std::vector<Var>{}, nullptr, false);
}

NoGradScope::NoGradScope() : previous_(g_no_grad) { g_no_grad = true; }
NoGradScope::~NoGradScope() { g_no_grad = previous_; }

Var MatMul(const Var& a, const Var& b) {
  const DenseArray& x = a->value();
  const DenseArray& y = b->value();
  if (x.rank() != 2 || y.rank() != 2 || x.shape()[1] != y.shape()[0]) {
    ThrowShape("matmul", x.shape(), y.shape());
  }
  DenseArray out = DenseArray::Matrix(x.shape()[0], y.shape()[1]);
  AsMatrix(out).noalias() = AsMatrix(x) * AsMatrix(y);
  return MakeNode("matmul", std::move(out), {a, b}, [](Node& self) {
    const auto g = AsMatrix(self.grad());
    if (DenseArray* ga = ParentGrad(self, 0)) {
      AsMatrix(*ga).noalias() += g * AsMatrix(self.parent(1)->value()).transpose();
    }
    if (DenseArray* gb = ParentGrad(self, 1)) {
      AsMatrix(*gb).noalias() += AsMatrix(self.parent(0)->value()).transpose() * g;
    }
  });
}

Var Add(const Var& a, const Var& b) {
  const DenseArray& x = a->value();
  const DenseArray& y = b->value();
  if (x.shape() == y.shape()) {
    DenseArray out = x;
    AsArray(out) += AsArray(y);
    return MakeNode("add", std::move(out), {a, b}, [](Node& self) {
      for (size_t i = 0; i < 2; ++i) {
        if (DenseArray* gp = ParentGrad(self, i)) {
          AsArray(*gp) += AsArray(self.grad());
        }
      }
    });
  }
  if (x.rank() != 2 || !IsRowOf(y, x)) ThrowShape("add", x.shape(), y.shape());
  DenseArray out = x;
  AsMatrix(out).rowwise() += AsArray(y).matrix().transpose();
  return MakeNode("add", std::move(out), {a, b}, [](Node& self) {
    if (DenseArray* ga = ParentGrad(self, 0)) {
      AsArray(*ga) += AsArray(self.grad());
    }
    if (DenseArray* gb = ParentGrad(self, 1)) {
      AsArray(*gb) += AsMatrix(self.grad()).colwise().sum().transpose().array();
    }
  });
}

Var Mul(const Var& a, const Var& b) {
  const DenseArray& x = a->value();
  const DenseArray& y = b->value();
  if (x.shape() != y.shape()) ThrowShape("mul", x.shape(), y.shape());
  DenseArray out = x;
  AsArray(out) *= AsArray(y);
  return MakeNode("mul", std::move(out), {a, b}, [](Node& self) {
    if (DenseArray* ga = ParentGrad(self, 0)) {
      AsArray(*ga) += AsArray(self.grad()) * AsArray(self.parent(1)->value());
    }
    if (DenseArray* gb = ParentGrad(self, 1)) {
      AsArray(*gb) += AsArray(self.grad()) * AsArray(self.parent(0)->value());
    }
  });
}

Var Scale(const Var& a, double factor) {
  DenseArray out = a->value();
  AsArray(out) *= factor;
  return MakeNode("scale", std::move(out), {a}, [factor](Node& self) {
    if (DenseArray* ga = ParentGrad(self, 0)) {
      AsArray(*ga) += factor * AsArray(self.grad());
    }
  });
}

Var Tanh(const Var& a) {
  DenseArray out = a->value();
  AsArray(out) = AsArray(out).tanh();
  return MakeNode("tanh", std::move(out), {a}, [](Node& self) {
    if (DenseArray* ga = ParentGrad(self, 0)) {
      const auto y = AsArray(self.value());
      AsArray(*ga) += AsArray(self.grad()) * (1.0 - y.square());
    }
  });
}

Var Log(const Var& a) {
  DenseArray out = a->value();
  AsArray(out) = AsArray(out).log();
  return MakeNode("log", std::move(out), {a}, [](Node& self) {
    if (DenseArray* ga = ParentGrad(self, 0)) {
      AsArray(*ga) += AsArray(self.grad()) / AsArray(self.parent(0)->value());
    }
  });
}

Var Exp(const Var& a) {
  DenseArray out = a->value();
  AsArray(out) = AsArray(out).exp();
  return MakeNode("exp", std::move(out), {a}, [](Node& self) {
    if (DenseArray* ga = ParentGrad(self, 0)) {
      AsArray(*ga) += AsArray(self.grad()) * AsArray(self.value());
    }
  });
}

Var Concat(std::span<const Var> inputs) {
  if (inputs.empty()) throw ShapeError("concat: no inputs");
  const size_t rows = inputs[0]->value().rows();
  size_t cols = 0;
  for (const Var& v : inputs) {
    if (v->value().rank() != 2 || v->value().rows() != rows) {
      ThrowShape("concat", inputs[0]->value().shape(), v->value().shape());
    }
    cols += v->value().cols();
  }
  DenseArray out = DenseArray::Matrix(rows, cols);
  size_t offset = 0;
  for (const Var& v : inputs) {
    const DenseArray& x = v->value();
    AsMatrix(out).middleCols(static_cast<Eigen::Index>(offset),
                             static_cast<Eigen::Index>(x.cols())) = AsMatrix(x);
    offset += x.cols();
  }
  std::vector<Var> parents(inputs.begin(), inputs.end());
  return MakeNode("concat", std::move(out), std::move(parents), [](Node& self) {
    const auto g = AsMatrix(self.grad());
    Eigen::Index offset = 0;
    for (size_t i = 0; i < self.parents().size(); ++i) {
      const auto width =
          static_cast<Eigen::Index>(self.parent(i)->value().cols());
      if (DenseArray* gp = ParentGrad(self, i)) {
        AsMatrix(*gp) += g.middleCols(offset, width);
      }
      offset += width;
    }
  });
}

Var RowSelect(const Var& table, std::span<const int> indices) {
  const DenseArray& t = table->value();
  if (t.rank() != 2) {
    ThrowShape("row-select", t.shape(), Shape{indices.size()});
  }
  const size_t width = t.cols();
  DenseArray out = DenseArray::Matrix(indices.size(), width);
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || static_cast<size_t>(indices[i]) >= t.rows()) {
      throw ShapeError("row-select: index " + std::to_string(indices[i]) +
                       " out of range for table " + ShapeToString(t.shape()));
    }
    std::copy_n(t.row(indices[i]).begin(), width, out.row(i).begin());
  }
  std::vector<int> rows(indices.begin(), indices.end());
  return MakeNode("row-select", std::move(out), {table},
                  [rows = std::move(rows)](Node& self) {
                    if (DenseArray* gt = ParentGrad(self, 0)) {
                      const DenseArray& g = self.grad();
                      for (size_t i = 0; i < rows.size(); ++i) {
                        auto dst = gt->row(rows[i]);
                        auto src = g.row(i);
                        for (size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
                      }
                    }
                  });
}

Var Sum(const Var& a) {
  DenseArray out = DenseArray::Scalar(AsArray(a->value()).sum());
  return MakeNode("sum", std::move(out), {a}, [](Node& self) {
    if (DenseArray* ga = ParentGrad(self, 0)) {
      AsArray(*ga) += self.grad().item();
    }
  });
}

Var SumLastAxis(const Var& a) {
  const DenseArray& x = a->value();
  DenseArray out = DenseArray::Matrix(x.rows(), 1);
  AsMatrix(out) = AsMatrix(x).rowwise().sum();
  return MakeNode("sum-last-axis", std::move(out), {a}, [](Node& self) {
    if (DenseArray* ga = ParentGrad(self, 0)) {
      AsMatrix(*ga).colwise() += AsMatrix(self.grad()).col(0);
    }
  });
}

Var Softmax(const Var& a) {
  DenseArray out = a->value();
  auto y = AsMatrix(out);
  y.colwise() -= y.rowwise().maxCoeff();
  y = y.array().exp().matrix();
  y.array().colwise() /= y.rowwise().sum().array();
  return MakeNode("softmax", std::move(out), {a}, [](Node& self) {
    if (DenseArray* ga = ParentGrad(self, 0)) {
      const auto y = AsMatrix(self.value()).array();
      const auto g = AsMatrix(self.grad()).array();
      const Eigen::ArrayXd inner = (g * y).rowwise().sum();
      AsMatrix(*ga).array() += y * (g.colwise() - inner);
    }
  });
}

Var LogSoftmax(const Var& a) {
  DenseArray out = a->value();
  auto y = AsMatrix(out);
  y.colwise() -= y.rowwise().maxCoeff();
  const Eigen::VectorXd log_norm = y.array().exp().rowwise().sum().log();
  y.colwise() -= log_norm;
  return MakeNode("log-softmax", std::move(out), {a}, [](Node& self) {
    if (DenseArray* ga = ParentGrad(self, 0)) {
      const auto p = AsMatrix(self.value()).array().exp();
      const auto g = AsMatrix(self.grad()).array();
      const Eigen::ArrayXd total = g.rowwise().sum();
      AsMatrix(*ga).array() += g - p.colwise() * total;
    }
  });
}

Var StraightThrough(DenseArray hard, const Var& soft) {
  if (hard.shape() != soft->value().shape()) {
    ThrowShape("straight-through", hard.shape(), soft->value().shape());
  }
  return MakeNode("straight-through", std::move(hard), {soft}, [](Node& self) {
    if (DenseArray* gs = ParentGrad(self, 0)) {
      AsArray(*gs) += AsArray(self.grad());
    }
  });
}

void Backward(const Var& root) {
  if (root->value().size() != 1) {
    throw ShapeError("backward: root must be scalar, got shape " +
                     ShapeToString(root->value().shape()));
  }
  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack{{root.get(), 0}};
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents().size()) {
      Node* p = node->parents()[next++].get();
      if (p->requires_grad() && visited.insert(p).second) {
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    if (!n->is_leaf()) n->ZeroGrad();
  }
  root->mutable_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) (*it)->RunBackward();
}

}  // namespace emcomm
