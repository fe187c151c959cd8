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

#include "emcomm/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>

namespace emcomm {
namespace {

constexpr std::array<char, 8> kMagic = {'E', 'M', 'C', 'K', 'P', 'T', '0', '1'};
// Guards against reading garbage lengths from a corrupt file.
constexpr uint64_t kMaxLength = uint64_t{1} << 40;

void WriteU64(std::ostream& out, uint64_t x) {
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

uint64_t ReadU64(std::istream& in) {
  std::array<unsigned char, 8> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw CheckpointError("checkpoint truncated");
  }
  uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | bytes[i];
  return x;
}

uint64_t ReadLength(std::istream& in) {
  const uint64_t n = ReadU64(in);
  if (n > kMaxLength) throw CheckpointError("checkpoint length field corrupt");
  return n;
}

std::string ReadString(std::istream& in) {
  std::string s(ReadLength(in), '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(s.size()))) {
    throw CheckpointError("checkpoint truncated");
  }
  return s;
}

}  // namespace

const DenseArray* CheckpointData::Find(const std::string& name) const {
  for (const auto& [n, array] : tensors) {
    if (n == name) return &array;
  }
  return nullptr;
}

void SaveCheckpoint(const std::filesystem::path& path,
                    const std::string& header_json,
                    const ParameterSet& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string());
  out.write(kMagic.data(), kMagic.size());
  WriteU64(out, header_json.size());
  out.write(header_json.data(), static_cast<std::streamsize>(header_json.size()));
  WriteU64(out, params.entries().size());
  for (const auto& [name, var] : params.entries()) {
    const DenseArray& value = var->value();
    WriteU64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    WriteU64(out, value.rank());
    for (size_t d : value.shape()) WriteU64(out, d);
    for (double x : value.data()) WriteU64(out, std::bit_cast<uint64_t>(x));
  }
  if (!out) throw CheckpointError("write failed for " + path.string());
}

CheckpointData LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::array<char, 8> magic;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw CheckpointError(path.string() + " is not an emcomm checkpoint");
  }
  CheckpointData data;
  data.header_json = ReadString(in);
  const uint64_t count = ReadLength(in);
  for (uint64_t t = 0; t < count; ++t) {
    std::string name = ReadString(in);
    const uint64_t rank = ReadLength(in);
    Shape shape(rank);
    for (auto& d : shape) d = ReadLength(in);
    std::vector<double> values(ShapeProduct(shape));
    for (double& x : values) x = std::bit_cast<double>(ReadU64(in));
    data.tensors.emplace_back(std::move(name),
                              DenseArray(std::move(shape), std::move(values)));
  }
  return data;
}

void RestoreParameters(const CheckpointData& data, const ParameterSet& params) {
  for (const auto& [name, var] : params.entries()) {
    const DenseArray* stored = data.Find(name);
    if (!stored) throw CheckpointError("checkpoint lacks parameter " + name);
    if (stored->shape() != var->value().shape()) {
      throw CheckpointError("parameter " + name + " has shape " +
                            ShapeToString(stored->shape()) +
                            " in checkpoint, expected " +
                            ShapeToString(var->value().shape()));
    }
    var->mutable_value() = *stored;
  }
}

}  // namespace emcomm
