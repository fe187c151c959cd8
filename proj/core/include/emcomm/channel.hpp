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

#ifndef EMCOMM_CHANNEL_HPP_
#define EMCOMM_CHANNEL_HPP_

#include <span>
#include <vector>

#include "emcomm/autodiff.hpp"
#include "emcomm/rng.hpp"

namespace emcomm {

struct ChannelConfig {
  double temperature = 1.0;
  // Hard one-hot forward value, soft-sample gradient.
  bool straight_through = true;

  void Validate() const;
};

struct ChannelSample {
  // What the receiver consumes: the soft sample, or the straight-through
  // one-hot whose gradient flows into `soft`.
  Var symbols;
  Var soft;
  // Row-wise argmax of the soft sample; ties go to the lowest index.
  std::vector<int> hard;
};

// Standard Gumbel noise of shape [rows x vocab].
DenseArray SampleGumbelNoise(size_t rows, size_t vocab, RngStream& rng);

// softmax((logits + noise) / temperature), row-wise. Noise is passed in so
// that a fixed draw makes the sample a deterministic function of the logits.
ChannelSample GumbelSoftmaxSample(const Var& logits, const DenseArray& noise,
                                  const ChannelConfig& config);

// Row-wise argmax, lowest index on ties.
std::vector<int> ArgmaxRows(const DenseArray& a);
DenseArray OneHotRows(std::span<const int> indices, size_t width);

}  // namespace emcomm

#endif  // EMCOMM_CHANNEL_HPP_
