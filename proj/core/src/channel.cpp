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

#include "emcomm/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace emcomm {

void ChannelConfig::Validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("channel temperature must be positive");
  }
}

DenseArray SampleGumbelNoise(size_t rows, size_t vocab, RngStream& rng) {
  DenseArray noise = DenseArray::Matrix(rows, vocab);
  rng.FillGumbel(noise.data());
  return noise;
}

std::vector<int> ArgmaxRows(const DenseArray& a) {
  std::vector<int> out(a.rows());
  for (size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    size_t best = 0;
    for (size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

DenseArray OneHotRows(std::span<const int> indices, size_t width) {
  DenseArray out = DenseArray::Matrix(indices.size(), width);
  for (size_t r = 0; r < indices.size(); ++r) {
    out.at(r, static_cast<size_t>(indices[r])) = 1.0;
  }
  return out;
}

ChannelSample GumbelSoftmaxSample(const Var& logits, const DenseArray& noise,
                                  const ChannelConfig& config) {
  config.Validate();
  Var perturbed = Add(logits, Constant(noise));
  if (config.temperature != 1.0) {
    perturbed = Scale(perturbed, 1.0 / config.temperature);
  }
  ChannelSample sample;
  sample.soft = Softmax(perturbed);
  sample.hard = ArgmaxRows(sample.soft->value());
  if (config.straight_through) {
    sample.symbols = StraightThrough(
        OneHotRows(sample.hard, sample.soft->value().cols()), sample.soft);
  } else {
    sample.symbols = sample.soft;
  }
  return sample;
}

}  // namespace emcomm
