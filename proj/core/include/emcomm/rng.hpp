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

#ifndef EMCOMM_RNG_HPP_
#define EMCOMM_RNG_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace emcomm {

// One application of the Philox4x32-10 bijection (Salmon et al., SC'11).
// Exposed for known-answer testing.
std::array<uint32_t, 4> Philox4x32(std::array<uint32_t, 4> counter,
                                   std::array<uint32_t, 2> key);

// A reproducible pseudorandom stream backed by Philox4x32-10 in counter mode.
//
// The 64-bit seed becomes the Philox key; the 128-bit counter starts at zero
// and is incremented once per 4 x 32-bit block. Streams are therefore
// identical across platforms for a given seed. Child streams obtained via
// Split() use a key derived from the parent key and the label through
// SplitMix64, so distinct labels give independent, reproducible streams that
// do not advance the parent.
class RngStream {
 public:
  explicit RngStream(uint64_t seed);

  RngStream Split(std::string_view label) const;
  RngStream Split(uint64_t index) const;

  uint64_t key() const { return key_; }

  uint32_t NextU32();
  uint64_t NextU64();

  // 53-bit resolution in [0, 1).
  double Uniform();
  // 53-bit resolution in (0, 1); never returns 0 or 1.
  double UniformOpen();
  double Uniform(double lo, double hi);
  // Unbiased integer in [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n);
  // Index drawn from a categorical distribution by inverse CDF.
  int Categorical(std::span<const double> probabilities);
  // Standard Gumbel draws, -log(-log(u)) with u = (k + 0.5) / 2^32 for a
  // 32-bit draw k. The half-offset keeps u strictly inside (0, 1).
  void FillGumbel(std::span<double> out);

 private:
  RngStream(uint64_t key, int /*tag*/);
  void Refill();

  uint64_t key_;
  std::array<uint32_t, 4> counter_{};
  std::array<uint32_t, 4> block_{};
  int available_ = 0;
};

// SplitMix64 finalizer; used for key derivation and config fingerprints.
uint64_t SplitMix64(uint64_t x);

}  // namespace emcomm

#endif  // EMCOMM_RNG_HPP_
