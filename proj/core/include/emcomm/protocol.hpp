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

#ifndef EMCOMM_PROTOCOL_HPP_
#define EMCOMM_PROTOCOL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "emcomm/agents.hpp"
#include "emcomm/environment.hpp"

namespace emcomm {

// Statistics of a frozen sender/receiver pair over an evaluation split.
struct RunMetrics {
  double accuracy = 0.0;
  int64_t unique_messages = 0;
  double message_entropy = 0.0;
  int64_t unique_targets = 0;
  double target_entropy = 0.0;
  // I(message; feature i) in bits, one entry per feature.
  std::vector<double> feature_mi;
  bool converged = false;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

// Statistics from already-computed messages (one symbol sequence per
// instance, describing that instance's target) and receiver choices. Every
// instance counts with multiplicity. `converged` is left false.
RunMetrics ComputeProtocolStats(std::span<const GameInstance> split,
                                const EnvironmentSpec& spec,
                                std::span<const std::vector<int>> messages,
                                std::span<const int> choices);

// Greedy (noise-free) evaluation of the agents over `split`.
RunMetrics ProtocolStats(const SenderAgent& sender,
                         const ReceiverAgent& receiver,
                         std::span<const GameInstance> split,
                         const EnvironmentSpec& spec);

struct MessageTableRow {
  ObjectVector object;
  std::vector<int> symbols;
};

// Greedy message for every object of the environment, in lexicographic
// object order.
std::vector<MessageTableRow> DumpMessageTable(const SenderAgent& sender,
                                              const EnvironmentSpec& spec);

// TSV lines "v1 v2 v3 v4 v5<TAB>symbol_id". Messages longer than one symbol
// list their ids separated by commas.
void WriteMessageTable(const std::filesystem::path& path,
                       std::span<const MessageTableRow> rows);

}  // namespace emcomm

#endif  // EMCOMM_PROTOCOL_HPP_
