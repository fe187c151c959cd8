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

#include "emcomm/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <stdexcept>

namespace emcomm {
namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void MulHiLo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  const uint64_t product = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(product >> 32);
  lo = static_cast<uint32_t>(product);
}

uint64_t HashLabel(std::string_view label) {
  uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<uint32_t, 4> Philox4x32(std::array<uint32_t, 4> ctr,
                                   std::array<uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    uint32_t hi0, lo0, hi1, lo1;
    MulHiLo(kPhiloxM0, ctr[0], hi0, lo0);
    MulHiLo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(uint64_t seed) : key_(seed) {}

RngStream::RngStream(uint64_t key, int) : key_(key) {}

RngStream RngStream::Split(std::string_view label) const {
  return RngStream(SplitMix64(key_ ^ SplitMix64(HashLabel(label))), 0);
}

RngStream RngStream::Split(uint64_t index) const {
  return RngStream(SplitMix64(key_ ^ SplitMix64(~index)), 0);
}

void RngStream::Refill() {
  block_ = Philox4x32(counter_, {static_cast<uint32_t>(key_),
                                 static_cast<uint32_t>(key_ >> 32)});
  for (auto& word : counter_) {
    if (++word != 0) break;
  }
  available_ = 4;
}

uint32_t RngStream::NextU32() {
  if (available_ == 0) Refill();
  return block_[4 - available_--];
}

uint64_t RngStream::NextU64() {
  const uint64_t hi = NextU32();
  return (hi << 32) | NextU32();
}

double RngStream::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double RngStream::UniformOpen() {
  return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::Uniform(double lo, double hi) {
  return lo + (hi - lo) * Uniform();
}

uint64_t RngStream::UniformInt(uint64_t n) {
  if (n == 0) throw std::invalid_argument("UniformInt: n must be positive");
  // Rejection keeps the draw exactly uniform.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % n;
}

int RngStream::Categorical(std::span<const double> probabilities) {
  const double u = Uniform();
  double cumulative = 0.0;
  int last_positive = -1;
  for (size_t k = 0; k < probabilities.size(); ++k) {
    if (probabilities[k] <= 0.0) continue;
    cumulative += probabilities[k];
    last_positive = static_cast<int>(k);
    if (u < cumulative) return last_positive;
  }
  // Rounding left the cumulative sum just under 1.
  return last_positive;
}

void RngStream::FillGumbel(std::span<double> out) {
  // Evaluated in an Eigen-owned buffer so that vectorization does not depend
  // on the caller's alignment.
  Eigen::ArrayXd u(static_cast<Eigen::Index>(out.size()));
  for (double& x : u) x = (static_cast<double>(NextU32()) + 0.5) * 0x1.0p-32;
  u = -(-u.log()).log();
  std::copy(u.begin(), u.end(), out.begin());
}

}  // namespace emcomm
