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

#include "emcomm/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace emcomm {

Adam::Adam(std::vector<Var> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  if (!(options_.lr >= 0.0) || !(options_.epsilon > 0.0) ||
      !(options_.beta1 >= 0.0 && options_.beta1 < 1.0) ||
      !(options_.beta2 >= 0.0 && options_.beta2 < 1.0)) {
    throw std::invalid_argument("Adam: invalid hyperparameters");
  }
  for (const Var& p : params_) {
    m_.emplace_back(p->value().shape(), 0.0);
    v_.emplace_back(p->value().shape(), 0.0);
  }
}

bool Adam::GradientsFinite() const {
  for (const Var& p : params_) {
    if (!p->grad().AllFinite()) return false;
  }
  return true;
}

bool Adam::Step() {
  if (!GradientsFinite()) return false;
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (size_t k = 0; k < params_.size(); ++k) {
    DenseArray& w = params_[k]->mutable_value();
    const DenseArray& g = params_[k]->grad();
    DenseArray& m = m_[k];
    DenseArray& v = v_[k];
    for (size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
  return true;
}

void Adam::ZeroGrad() const {
  for (const Var& p : params_) p->ZeroGrad();
}

}  // namespace emcomm
