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

#include "emcomm/environment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace emcomm {
namespace {

std::string FormatDouble(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::string> SplitOn(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

std::vector<int> ParseInts(const std::string& s) {
  std::istringstream in(s);
  std::vector<int> out;
  int x;
  while (in >> x) out.push_back(x);
  if (!in.eof()) throw std::invalid_argument("malformed integer list: " + s);
  return out;
}

}  // namespace

EnvironmentSpec EnvironmentSpec::Uniform(int n_features, int n_values) {
  if (n_features <= 0 || n_values <= 0) {
    throw std::invalid_argument("environment dimensions must be positive");
  }
  EnvironmentSpec spec;
  spec.n_features = n_features;
  spec.n_values = n_values;
  spec.probabilities.assign(
      n_features, std::vector<double>(n_values, 1.0 / n_values));
  return spec;
}

EnvironmentSpec EnvironmentSpec::Skewed(int n_features) {
  EnvironmentSpec spec = Uniform(n_features, 4);
  spec.probabilities[0] = {0.75, 0.15, 0.05, 0.05};
  return spec;
}

void EnvironmentSpec::Validate() const {
  if (n_features <= 0 || n_values <= 0) {
    throw std::invalid_argument("environment dimensions must be positive");
  }
  if (probabilities.size() != static_cast<size_t>(n_features)) {
    throw std::invalid_argument("expected " + std::to_string(n_features) +
                                " probability rows, got " +
                                std::to_string(probabilities.size()));
  }
  for (size_t f = 0; f < probabilities.size(); ++f) {
    const auto& row = probabilities[f];
    if (row.size() != static_cast<size_t>(n_values)) {
      throw std::invalid_argument("feature " + std::to_string(f + 1) +
                                  " has " + std::to_string(row.size()) +
                                  " probabilities, expected " +
                                  std::to_string(n_values));
    }
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("feature " + std::to_string(f + 1) +
                                    " has an invalid probability");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("feature " + std::to_string(f + 1) +
                                  " probabilities sum to " +
                                  FormatDouble(total));
    }
  }
}

uint64_t EnvironmentSpec::NumObjects() const {
  uint64_t n = 1;
  for (int f = 0; f < n_features; ++f) n *= static_cast<uint64_t>(n_values);
  return n;
}

uint64_t EnvironmentSpec::NumSupportedObjects() const {
  uint64_t n = 1;
  for (const auto& row : probabilities) {
    uint64_t positive = 0;
    for (double p : row) positive += (p > 0.0);
    n *= positive;
  }
  return n;
}

EnvironmentSpec LoadEnvironmentFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  EnvironmentSpec spec;
  spec.probabilities.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::vector<double> row;
    double p;
    while (fields >> p) row.push_back(p);
    if (!fields.eof()) {
      throw std::invalid_argument("malformed probability line: " + line);
    }
    if (!row.empty()) spec.probabilities.push_back(std::move(row));
  }
  if (spec.probabilities.empty()) {
    throw std::invalid_argument(path.string() + " holds no probability rows");
  }
  spec.n_features = static_cast<int>(spec.probabilities.size());
  spec.n_values = static_cast<int>(spec.probabilities[0].size());
  spec.Validate();
  return spec;
}

ObjectVector ObjectVector::FromOneBased(std::span<const int> values) {
  std::vector<int> zero_based(values.begin(), values.end());
  for (int& v : zero_based) --v;
  return ObjectVector(std::move(zero_based));
}

ObjectVector ObjectVector::FromIndex(uint64_t index, int n_features,
                                     int n_values) {
  std::vector<int> values(n_features);
  for (int f = n_features - 1; f >= 0; --f) {
    values[f] = static_cast<int>(index % n_values);
    index /= n_values;
  }
  return ObjectVector(std::move(values));
}

std::vector<int> ObjectVector::OneBased() const {
  std::vector<int> out = values_;
  for (int& v : out) ++v;
  return out;
}

uint64_t ObjectVector::Index(int n_values) const {
  uint64_t index = 0;
  for (int v : values_) index = index * n_values + static_cast<uint64_t>(v);
  return index;
}

std::string ObjectVector::ToString() const {
  std::string out;
  for (size_t i = 0; i < values_.size(); ++i) {
    if (i > 0) out += ' ';
    out += std::to_string(values_[i] + 1);
  }
  return out;
}

ObjectVector SampleObject(const EnvironmentSpec& spec, RngStream& rng) {
  std::vector<int> values(spec.n_features);
  for (int f = 0; f < spec.n_features; ++f) {
    values[f] = rng.Categorical(spec.probabilities[f]);
  }
  return ObjectVector(std::move(values));
}

GameInstance SampleGameInstance(const EnvironmentSpec& spec, RngStream& rng) {
  GameInstance instance;
  instance.target = SampleObject(spec, rng);
  do {
    instance.distractor = SampleObject(spec, rng);
  } while (instance.distractor == instance.target);
  instance.order = static_cast<int>(rng.UniformInt(2));
  instance.label = instance.order;
  return instance;
}

DatasetSplits BuildDataset(const EnvironmentSpec& spec, const SplitSizes& sizes,
                           uint64_t seed) {
  spec.Validate();
  if (spec.NumSupportedObjects() < 2) {
    throw std::invalid_argument(
        "environment supports a single object; no distractor can differ "
        "from the target");
  }
  if (sizes.train == 0 || sizes.valid == 0 || sizes.test == 0) {
    throw std::invalid_argument("split sizes must be positive");
  }
  DatasetSplits data;
  data.sizes = sizes;
  data.seed = seed;
  const RngStream root(seed);
  auto fill = [&](std::vector<GameInstance>& split, size_t n,
                  std::string_view label) {
    RngStream rng = root.Split(label);
    split.reserve(n);
    for (size_t i = 0; i < n; ++i) split.push_back(SampleGameInstance(spec, rng));
  };
  fill(data.train, sizes.train, "train");
  fill(data.valid, sizes.valid, "valid");
  fill(data.test, sizes.test, "test");
  return data;
}

DenseArray OneHotEncode(const ObjectVector& obj, const EnvironmentSpec& spec) {
  const ObjectVector objects[] = {obj};
  return OneHotEncodeBatch(objects, spec).Reshaped({spec.EncodedSize()});
}

DenseArray OneHotEncodeBatch(std::span<const ObjectVector> objects,
                             const EnvironmentSpec& spec) {
  DenseArray out = DenseArray::Matrix(objects.size(), spec.EncodedSize());
  for (size_t r = 0; r < objects.size(); ++r) {
    const ObjectVector& obj = objects[r];
    if (obj.size() != static_cast<size_t>(spec.n_features)) {
      throw std::invalid_argument("object " + obj.ToString() + " has " +
                                  std::to_string(obj.size()) +
                                  " features, expected " +
                                  std::to_string(spec.n_features));
    }
    for (int f = 0; f < spec.n_features; ++f) {
      if (obj[f] < 0 || obj[f] >= spec.n_values) {
        throw std::invalid_argument("object " + obj.ToString() +
                                    " has an out-of-range value");
      }
      out.at(r, static_cast<size_t>(f * spec.n_values + obj[f])) = 1.0;
    }
  }
  return out;
}

std::string FormatDatasetHeader(const DatasetFileHeader& header) {
  std::string out = "# emcomm-dataset v1 split=" + header.split +
                    " seed=" + std::to_string(header.seed) +
                    " sizes=" + std::to_string(header.sizes.train) + "," +
                    std::to_string(header.sizes.valid) + "," +
                    std::to_string(header.sizes.test) +
                    " n_features=" + std::to_string(header.spec.n_features) +
                    " n_values=" + std::to_string(header.spec.n_values) +
                    " probs=";
  for (size_t f = 0; f < header.spec.probabilities.size(); ++f) {
    if (f > 0) out += ';';
    const auto& row = header.spec.probabilities[f];
    for (size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out += ',';
      out += FormatDouble(row[k]);
    }
  }
  return out;
}

std::string FormatInstance(const GameInstance& instance) {
  return instance.target.ToString() + " | " + instance.distractor.ToString() +
         " | " + std::to_string(instance.order) + " | " +
         std::to_string(instance.label);
}

void WriteSplitFile(const std::filesystem::path& path,
                    const DatasetFileHeader& header,
                    std::span<const GameInstance> instances) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << FormatDatasetHeader(header) << '\n';
  for (const auto& instance : instances) out << FormatInstance(instance) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

SplitFile ReadSplitFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  SplitFile file;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# emcomm-dataset v1", 0) != 0) {
    throw std::invalid_argument(path.string() + " lacks a dataset header");
  }
  std::istringstream tokens(line.substr(2));
  std::string token;
  auto& h = file.header;
  while (tokens >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "split") {
      h.split = value;
    } else if (key == "seed") {
      h.seed = std::stoull(value);
    } else if (key == "sizes") {
      const auto parts = SplitOn(value, ',');
      if (parts.size() != 3) throw std::invalid_argument("bad sizes: " + value);
      h.sizes = {std::stoull(parts[0]), std::stoull(parts[1]),
                 std::stoull(parts[2])};
    } else if (key == "n_features") {
      h.spec.n_features = std::stoi(value);
    } else if (key == "n_values") {
      h.spec.n_values = std::stoi(value);
    } else if (key == "probs") {
      h.spec.probabilities.clear();
      for (const auto& row : SplitOn(value, ';')) {
        std::vector<double> probs;
        for (const auto& p : SplitOn(row, ',')) probs.push_back(std::stod(p));
        h.spec.probabilities.push_back(std::move(probs));
      }
    }
  }
  h.spec.Validate();

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = SplitOn(line, '|');
    if (fields.size() != 4) {
      throw std::invalid_argument("malformed instance line: " + line);
    }
    GameInstance instance;
    instance.target = ObjectVector::FromOneBased(ParseInts(fields[0]));
    instance.distractor = ObjectVector::FromOneBased(ParseInts(fields[1]));
    const auto order = ParseInts(fields[2]);
    const auto label = ParseInts(fields[3]);
    if (order.size() != 1 || label.size() != 1 || order[0] < 0 ||
        order[0] > 1 || label[0] != order[0]) {
      throw std::invalid_argument("inconsistent order/label: " + line);
    }
    instance.order = order[0];
    instance.label = label[0];
    // Validates feature ranges.
    OneHotEncode(instance.target, h.spec);
    OneHotEncode(instance.distractor, h.spec);
    if (instance.target == instance.distractor) {
      throw std::invalid_argument("distractor equals target: " + line);
    }
    file.instances.push_back(std::move(instance));
  }
  const size_t expected = h.split == "train"   ? h.sizes.train
                          : h.split == "valid" ? h.sizes.valid
                          : h.split == "test"  ? h.sizes.test
                                               : file.instances.size();
  if (file.instances.size() != expected) {
    throw std::invalid_argument(path.string() + " holds " +
                                std::to_string(file.instances.size()) +
                                " instances, header says " +
                                std::to_string(expected));
  }
  return file;
}

void WriteDataset(const std::filesystem::path& dir, const DatasetSplits& data,
                  const EnvironmentSpec& spec) {
  std::filesystem::create_directories(dir);
  DatasetFileHeader header{"", data.seed, data.sizes, spec};
  header.split = "train";
  WriteSplitFile(dir / "train.txt", header, data.train);
  header.split = "valid";
  WriteSplitFile(dir / "valid.txt", header, data.valid);
  header.split = "test";
  WriteSplitFile(dir / "test.txt", header, data.test);
}

}  // namespace emcomm
