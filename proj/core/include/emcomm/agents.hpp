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

// Sender and receiver agents and one batched round of the referential game.
//
// The sender encodes the target's one-hot features into its initial hidden
// state, takes one RNN step per message symbol (a learned start vector is
// the first input) and emits vocabulary logits. The receiver runs its own
// RNN over the embedded symbols from a zero state and scores each candidate
// by the dot product of its linear encoding with the final hidden state.

#ifndef EMCOMM_AGENTS_HPP_
#define EMCOMM_AGENTS_HPP_

#include <optional>
#include <span>
#include <vector>

#include "emcomm/autodiff.hpp"
#include "emcomm/channel.hpp"
#include "emcomm/environment.hpp"
#include "emcomm/layers.hpp"
#include "emcomm/rng.hpp"

namespace emcomm {

struct AgentConfig {
  int n_features = 5;
  int n_values = 4;
  size_t vocab = 1100;
  size_t hidden = 50;
  size_t embed = 10;
  size_t message_length = 1;

  size_t input_size() const {
    return static_cast<size_t>(n_features) * static_cast<size_t>(n_values);
  }
  void Validate() const;
};

enum class SenderMode { kTrain, kGreedy };

// A batch of messages. `symbols[t]` is [batch x vocab]: the channel output
// in training mode, a constant one-hot in greedy mode. `hard[t][b]` is the
// symbol index of row b at step t. `soft` holds the pre-straight-through
// channel samples and is null in greedy mode.
struct Message {
  std::vector<Var> symbols;
  std::vector<Var> soft;
  std::vector<Var> logits;
  std::vector<std::vector<int>> hard;

  size_t batch() const { return hard.empty() ? 0 : hard[0].size(); }
  // Symbols of one row, in order.
  std::vector<int> Sequence(size_t row) const;
};

class SenderAgent {
 public:
  SenderAgent(const AgentConfig& config, RngStream rng);

  // `encoded` is [batch x input_size]. Training mode needs one noise array
  // [batch x vocab] per message step; greedy mode ignores noise.
  Message Forward(const DenseArray& encoded, SenderMode mode,
                  const ChannelConfig& channel,
                  std::span<const DenseArray> noise = {}) const;

  // Greedy symbol sequences for each object.
  std::vector<std::vector<int>> Greedy(std::span<const ObjectVector> objects,
                                       const EnvironmentSpec& spec) const;

  ParameterSet Parameters() const;
  const AgentConfig& config() const { return config_; }

 private:
  AgentConfig config_;
  LinearLayer encoder_;
  RnnCell rnn_;
  Var start_;
  LinearLayer head_;
  // Feeds emitted symbols back in; only present for messages longer than 1.
  std::optional<EmbeddingTable> feedback_;
};

class ReceiverAgent {
 public:
  ReceiverAgent(const AgentConfig& config, RngStream rng);

  // Message representation from channel outputs ([batch x vocab] per step).
  Var Represent(std::span<const Var> symbols) const;
  // Message representation from symbol indices: symbols[t][b].
  Var Represent(const std::vector<std::vector<int>>& symbols) const;

  // [batch x 2] scores; column k belongs to candidates `first`/`second`
  // ([batch x input_size] each).
  Var Score(const Var& representation, const DenseArray& first,
            const DenseArray& second) const;

  ParameterSet Parameters() const;
  const AgentConfig& config() const { return config_; }

 private:
  Var RunRnn(std::span<const Var> inputs, size_t batch) const;

  AgentConfig config_;
  EmbeddingTable embedding_;
  RnnCell rnn_;
  LinearLayer candidate_encoder_;
};

struct RoundsResult {
  // Mean cross-entropy over the batch.
  Var loss;
  Var scores;
  Message message;
  // Chosen candidate per instance; ties go to position 0.
  std::vector<int> choices;
  size_t n_correct = 0;
  bool finite = true;
};

// Plays a batch of rounds. Training mode requires `noise` (see
// SenderAgent::Forward).
RoundsResult PlayRounds(const SenderAgent& sender, const ReceiverAgent& receiver,
                        std::span<const GameInstance> instances,
                        const EnvironmentSpec& spec,
                        const ChannelConfig& channel, SenderMode mode,
                        std::span<const DenseArray> noise = {});

// Noise for PlayRounds in training mode: one [batch x vocab] array per step.
std::vector<DenseArray> SampleMessageNoise(const AgentConfig& config,
                                           size_t batch, RngStream& rng);

// Decision rule on a [batch x 2] score array.
std::vector<int> ChooseCandidates(const DenseArray& scores);

}  // namespace emcomm

#endif  // EMCOMM_AGENTS_HPP_
