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

// Parameter checkpoint container.
//
// Byte layout, all integers unsigned 64-bit little-endian:
//
//   "EMCKPT01"                      8-byte magic
//   header_length, header bytes     UTF-8 JSON (hyperparameters and seeds)
//   tensor_count
//   repeated tensor_count times:
//     name_length, name bytes
//     rank, rank x dimension
//     product(dimensions) x IEEE-754 binary64, little-endian
//
// Values are stored bit-exactly, so save/load round trips are lossless.

#ifndef EMCOMM_CHECKPOINT_HPP_
#define EMCOMM_CHECKPOINT_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "emcomm/dense_array.hpp"
#include "emcomm/layers.hpp"

namespace emcomm {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointData {
  std::string header_json;
  std::vector<std::pair<std::string, DenseArray>> tensors;

  const DenseArray* Find(const std::string& name) const;
};

void SaveCheckpoint(const std::filesystem::path& path,
                    const std::string& header_json,
                    const ParameterSet& params);
CheckpointData LoadCheckpoint(const std::filesystem::path& path);

// Copies stored values into `params`; every parameter must be present with
// an identical shape.
void RestoreParameters(const CheckpointData& data, const ParameterSet& params);

}  // namespace emcomm

#endif  // EMCOMM_CHECKPOINT_HPP_
