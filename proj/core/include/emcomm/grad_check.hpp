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

#ifndef EMCOMM_GRAD_CHECK_HPP_
#define EMCOMM_GRAD_CHECK_HPP_

#include <functional>
#include <span>
#include <string>

#include "emcomm/autodiff.hpp"

namespace emcomm {

struct GradCheckReport {
  double max_relative_error = 0.0;
  size_t worst_parameter = 0;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  size_t entries_checked = 0;
};

// Compares the backward pass of `f` against central differences for every
// entry of every parameter. The relative error of one entry is
// |analytic - numeric| / max(1e-6, |analytic| + |numeric|).
//
// `f` must rebuild its graph from the current parameter values on every call
// and must be deterministic: all noise has to be sampled up front. A builder
// that returns different values for identical parameters is rejected with
// std::invalid_argument.
GradCheckReport GradCheck(const std::function<Var()>& f,
                          std::span<const Var> params, double epsilon);

}  // namespace emcomm

#endif  // EMCOMM_GRAD_CHECK_HPP_
