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

#include "emcomm/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace emcomm {
namespace {

double Evaluate(const std::function<Var()>& f) {
  NoGradScope no_grad;
  return f()->value().item();
}

}  // namespace

GradCheckReport GradCheck(const std::function<Var()>& f,
                          std::span<const Var> params, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("GradCheck: epsilon must be positive");
  }
  const double first = Evaluate(f);
  const double second = Evaluate(f);
  if (first != second) {
    throw std::invalid_argument(
        "GradCheck: builder is not deterministic; pre-sample all noise");
  }

  for (const Var& p : params) p->ZeroGrad();
  Backward(f());
  std::vector<DenseArray> analytic;
  analytic.reserve(params.size());
  for (const Var& p : params) analytic.push_back(p->grad());

  GradCheckReport report;
  for (size_t k = 0; k < params.size(); ++k) {
    DenseArray& value = params[k]->mutable_value();
    for (size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + epsilon;
      const double plus = Evaluate(f);
      value[i] = saved - epsilon;
      const double minus = Evaluate(f);
      value[i] = saved;

      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double exact = analytic[k][i];
      const double error = std::abs(exact - numeric) /
                           std::max(1e-6, std::abs(exact) + std::abs(numeric));
      ++report.entries_checked;
      if (error > report.max_relative_error || report.entries_checked == 1) {
        report.max_relative_error = error;
        report.worst_parameter = k;
        report.worst_index = i;
        report.worst_analytic = exact;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace emcomm
