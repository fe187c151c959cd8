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

#include "emcomm/protocol.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include "emcomm/infotheory.hpp"

namespace emcomm {
namespace {

constexpr size_t kEvalChunk = 500;

// Dense ids in order of first appearance, and their counts.
template <typename Key>
std::vector<int64_t> CountDistinct(std::span<const Key> keys,
                                   std::vector<size_t>* ids) {
  std::map<Key, size_t> index;
  std::vector<int64_t> counts;
  if (ids) ids->reserve(keys.size());
  for (const Key& key : keys) {
    auto [it, inserted] = index.emplace(key, counts.size());
    if (inserted) counts.push_back(0);
    ++counts[it->second];
    if (ids) ids->push_back(it->second);
  }
  return counts;
}

}  // namespace

RunMetrics ComputeProtocolStats(std::span<const GameInstance> split,
                                const EnvironmentSpec& spec,
                                std::span<const std::vector<int>> messages,
                                std::span<const int> choices) {
  if (split.empty()) throw std::invalid_argument("protocol stats: empty split");
  if (messages.size() != split.size() || choices.size() != split.size()) {
    throw std::invalid_argument(
        "protocol stats: need one message and one choice per instance");
  }
  RunMetrics metrics;
  size_t correct = 0;
  for (size_t i = 0; i < split.size(); ++i) {
    correct += (choices[i] == split[i].label);
  }
  metrics.accuracy =
      static_cast<double>(correct) / static_cast<double>(split.size());

  std::vector<size_t> message_ids;
  const std::vector<int64_t> message_counts =
      CountDistinct(messages, &message_ids);
  metrics.unique_messages = static_cast<int64_t>(message_counts.size());
  metrics.message_entropy = Entropy(message_counts);

  std::vector<ObjectVector> targets;
  targets.reserve(split.size());
  for (const auto& instance : split) targets.push_back(instance.target);
  const std::vector<int64_t> target_counts =
      CountDistinct(std::span<const ObjectVector>(targets), nullptr);
  metrics.unique_targets = static_cast<int64_t>(target_counts.size());
  metrics.target_entropy = Entropy(target_counts);

  for (int f = 0; f < spec.n_features; ++f) {
    JointCounts joint(message_counts.size(), static_cast<size_t>(spec.n_values));
    for (size_t i = 0; i < split.size(); ++i) {
      joint.Add(message_ids[i], static_cast<size_t>(targets[i][f]));
    }
    metrics.feature_mi.push_back(MutualInformation(joint));
  }
  return metrics;
}

RunMetrics ProtocolStats(const SenderAgent& sender,
                         const ReceiverAgent& receiver,
                         std::span<const GameInstance> split,
                         const EnvironmentSpec& spec) {
  NoGradScope no_grad;
  std::vector<std::vector<int>> messages;
  std::vector<int> choices;
  messages.reserve(split.size());
  choices.reserve(split.size());
  for (size_t begin = 0; begin < split.size(); begin += kEvalChunk) {
    const auto chunk = split.subspan(begin, std::min(kEvalChunk, split.size() - begin));
    const RoundsResult result = PlayRounds(sender, receiver, chunk, spec,
                                           ChannelConfig{}, SenderMode::kGreedy);
    for (size_t b = 0; b < chunk.size(); ++b) {
      messages.push_back(result.message.Sequence(b));
    }
    choices.insert(choices.end(), result.choices.begin(), result.choices.end());
  }
  return ComputeProtocolStats(split, spec, messages, choices);
}

std::vector<MessageTableRow> DumpMessageTable(const SenderAgent& sender,
                                              const EnvironmentSpec& spec) {
  const uint64_t n = spec.NumObjects();
  std::vector<MessageTableRow> rows;
  rows.reserve(n);
  for (uint64_t begin = 0; begin < n; begin += kEvalChunk) {
    std::vector<ObjectVector> objects;
    for (uint64_t i = begin; i < std::min<uint64_t>(n, begin + kEvalChunk); ++i) {
      objects.push_back(ObjectVector::FromIndex(i, spec.n_features, spec.n_values));
    }
    auto symbols = sender.Greedy(objects, spec);
    for (size_t k = 0; k < objects.size(); ++k) {
      rows.push_back({std::move(objects[k]), std::move(symbols[k])});
    }
  }
  return rows;
}

void WriteMessageTable(const std::filesystem::path& path,
                       std::span<const MessageTableRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (const auto& row : rows) {
    out << row.object.ToString() << '\t';
    for (size_t t = 0; t < row.symbols.size(); ++t) {
      if (t > 0) out << ',';
      out << row.symbols[t];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace emcomm
