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

// Object worlds for the referential game: independent categorical features,
// object sampling, target/distractor pairs and their text serialization.

#ifndef EMCOMM_ENVIRONMENT_HPP_
#define EMCOMM_ENVIRONMENT_HPP_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "emcomm/dense_array.hpp"
#include "emcomm/rng.hpp"

namespace emcomm {

// Per-feature value distributions. Values are 0-based in memory and 1-based
// in every file and printed form.
struct EnvironmentSpec {
  int n_features = 5;
  int n_values = 4;
  std::vector<std::vector<double>> probabilities;

  static EnvironmentSpec Uniform(int n_features = 5, int n_values = 4);
  // First feature distributed [0.75, 0.15, 0.05, 0.05], the rest uniform.
  // Requires n_values == 4.
  static EnvironmentSpec Skewed(int n_features = 5);

  // Throws std::invalid_argument unless every row is a probability vector of
  // length n_values summing to 1 within 1e-12.
  void Validate() const;
  uint64_t NumObjects() const;
  // Objects with positive probability.
  uint64_t NumSupportedObjects() const;
  size_t EncodedSize() const {
    return static_cast<size_t>(n_features) * static_cast<size_t>(n_values);
  }

  friend bool operator==(const EnvironmentSpec&,
                         const EnvironmentSpec&) = default;
};

// One probability row per feature, whitespace separated; '#' starts a
// comment.
EnvironmentSpec LoadEnvironmentFile(const std::filesystem::path& path);

class ObjectVector {
 public:
  ObjectVector() = default;
  explicit ObjectVector(std::vector<int> values) : values_(std::move(values)) {}
  static ObjectVector FromOneBased(std::span<const int> values);
  // Inverse of Index(): lexicographic rank with feature 1 most significant.
  static ObjectVector FromIndex(uint64_t index, int n_features, int n_values);

  int operator[](size_t i) const { return values_[i]; }
  size_t size() const { return values_.size(); }
  const std::vector<int>& values() const { return values_; }
  std::vector<int> OneBased() const;
  uint64_t Index(int n_values) const;
  std::string ToString() const;

  friend auto operator<=>(const ObjectVector&, const ObjectVector&) = default;

 private:
  std::vector<int> values_;
};

struct GameInstance {
  ObjectVector target;
  ObjectVector distractor;
  // 0: target presented first; 1: distractor presented first.
  int order = 0;
  // Position of the target in presentation order.
  int label = 0;

  const ObjectVector& candidate(int position) const {
    return (position == label) ? target : distractor;
  }
  friend bool operator==(const GameInstance&, const GameInstance&) = default;
};

struct SplitSizes {
  size_t train = 128000;
  size_t valid = 16000;
  size_t test = 4000;
  friend bool operator==(const SplitSizes&, const SplitSizes&) = default;
};

struct DatasetSplits {
  std::vector<GameInstance> train;
  std::vector<GameInstance> valid;
  std::vector<GameInstance> test;
  SplitSizes sizes;
  uint64_t seed = 0;
};

ObjectVector SampleObject(const EnvironmentSpec& spec, RngStream& rng);

// Draws a target and a distractor independently from `spec`, redrawing the
// distractor until it differs from the target, then a uniform presentation
// order.
GameInstance SampleGameInstance(const EnvironmentSpec& spec, RngStream& rng);

// Each split is drawn from its own child stream of `seed`, so the three are
// independent and each is reproducible on its own. Throws
// std::invalid_argument when the spec supports fewer than two objects.
DatasetSplits BuildDataset(const EnvironmentSpec& spec, const SplitSizes& sizes,
                           uint64_t seed);

// Concatenated one-hot blocks, one per feature.
DenseArray OneHotEncode(const ObjectVector& obj, const EnvironmentSpec& spec);
// Rows of OneHotEncode for each object: [objects.size() x EncodedSize()].
DenseArray OneHotEncodeBatch(std::span<const ObjectVector> objects,
                             const EnvironmentSpec& spec);

// Text dataset files. Each begins with one '#' header line holding the split
// name, seed, sizes and spec, followed by one instance per line:
//   t1 t2 t3 t4 t5 | d1 d2 d3 d4 d5 | order | label
struct DatasetFileHeader {
  std::string split;
  uint64_t seed = 0;
  SplitSizes sizes;
  EnvironmentSpec spec;
};

std::string FormatDatasetHeader(const DatasetFileHeader& header);
std::string FormatInstance(const GameInstance& instance);

void WriteSplitFile(const std::filesystem::path& path,
                    const DatasetFileHeader& header,
                    std::span<const GameInstance> instances);

struct SplitFile {
  DatasetFileHeader header;
  std::vector<GameInstance> instances;
};
SplitFile ReadSplitFile(const std::filesystem::path& path);

// Writes train.txt, valid.txt and test.txt into `dir`.
void WriteDataset(const std::filesystem::path& dir, const DatasetSplits& data,
                  const EnvironmentSpec& spec);

}  // namespace emcomm

#endif  // EMCOMM_ENVIRONMENT_HPP_
