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

#ifndef EMCOMM_ADAM_HPP_
#define EMCOMM_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "emcomm/autodiff.hpp"

namespace emcomm {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over a fixed list of parameter leaves.
class Adam {
 public:
  Adam(std::vector<Var> params, AdamOptions options);

  // Applies one update from the parameters' current gradients. If any
  // gradient entry is non-finite nothing is modified (moments and step count
  // included) and false is returned.
  bool Step();
  void ZeroGrad() const;
  bool GradientsFinite() const;

  int64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<DenseArray>& first_moments() const { return m_; }
  const std::vector<DenseArray>& second_moments() const { return v_; }

 private:
  std::vector<Var> params_;
  AdamOptions options_;
  std::vector<DenseArray> m_;
  std::vector<DenseArray> v_;
  int64_t step_ = 0;
};

}  // namespace emcomm

#endif  // EMCOMM_ADAM_HPP_
