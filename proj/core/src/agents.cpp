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

#include "emcomm/agents.hpp"

#include <cmath>
#include <stdexcept>

namespace emcomm {

void AgentConfig::Validate() const {
  if (n_features <= 0 || n_values <= 0 || vocab == 0 || hidden == 0 ||
      embed == 0 || message_length == 0) {
    throw std::invalid_argument("agent dimensions must be positive");
  }
}

std::vector<int> Message::Sequence(size_t row) const {
  std::vector<int> out;
  out.reserve(hard.size());
  for (const auto& step : hard) out.push_back(step[row]);
  return out;
}

SenderAgent::SenderAgent(const AgentConfig& config, RngStream rng)
    : config_((config.Validate(), config)),
      encoder_(config.input_size(), config.hidden, rng),
      rnn_(config.embed, config.hidden, rng),
      start_(Parameter(InitUniform({1, config.embed}, config.embed, rng))),
      head_(config.hidden, config.vocab, rng) {
  if (config.message_length > 1) feedback_.emplace(config.vocab, config.embed, rng);
}

Message SenderAgent::Forward(const DenseArray& encoded, SenderMode mode,
                             const ChannelConfig& channel,
                             std::span<const DenseArray> noise) const {
  if (encoded.rank() != 2 || encoded.cols() != config_.input_size()) {
    throw ShapeError("sender: encoded targets have shape " +
                     ShapeToString(encoded.shape()) + ", expected [batch, " +
                     std::to_string(config_.input_size()) + "]");
  }
  const size_t batch = encoded.rows();
  if (mode == SenderMode::kTrain) {
    if (noise.size() != config_.message_length) {
      throw std::invalid_argument("sender: need one noise array per symbol");
    }
    for (const DenseArray& n : noise) {
      if (n.shape() != Shape{batch, config_.vocab}) {
        throw ShapeError("sender: noise shape " + ShapeToString(n.shape()) +
                         " does not match [batch, vocab]");
      }
    }
  }

  Message message;
  Var h = encoder_.Forward(Constant(encoded));
  Var input = start_;
  for (size_t t = 0; t < config_.message_length; ++t) {
    h = rnn_.Step(input, h);
    Var logits = head_.Forward(h);
    message.logits.push_back(logits);
    if (mode == SenderMode::kTrain) {
      ChannelSample sample = GumbelSoftmaxSample(logits, noise[t], channel);
      message.symbols.push_back(sample.symbols);
      message.soft.push_back(sample.soft);
      message.hard.push_back(std::move(sample.hard));
    } else {
      message.hard.push_back(ArgmaxRows(logits->value()));
      message.symbols.push_back(
          Constant(OneHotRows(message.hard.back(), config_.vocab)));
      message.soft.push_back(nullptr);
    }
    if (t + 1 < config_.message_length) {
      input = (mode == SenderMode::kTrain)
                  ? feedback_->LookupSoft(message.symbols.back())
                  : feedback_->Lookup(message.hard.back());
    }
  }
  return message;
}

std::vector<std::vector<int>> SenderAgent::Greedy(
    std::span<const ObjectVector> objects, const EnvironmentSpec& spec) const {
  NoGradScope no_grad;
  const Message message = Forward(OneHotEncodeBatch(objects, spec),
                                  SenderMode::kGreedy, ChannelConfig{});
  std::vector<std::vector<int>> out;
  out.reserve(objects.size());
  for (size_t b = 0; b < objects.size(); ++b) out.push_back(message.Sequence(b));
  return out;
}

ParameterSet SenderAgent::Parameters() const {
  ParameterSet params;
  encoder_.Register(params, "sender.encoder");
  rnn_.Register(params, "sender.rnn");
  params.Add("sender.start", start_);
  head_.Register(params, "sender.head");
  if (feedback_) feedback_->Register(params, "sender.feedback");
  return params;
}

ReceiverAgent::ReceiverAgent(const AgentConfig& config, RngStream rng)
    : config_((config.Validate(), config)),
      embedding_(config.vocab, config.embed, rng),
      rnn_(config.embed, config.hidden, rng),
      candidate_encoder_(config.input_size(), config.hidden, rng) {}

Var ReceiverAgent::RunRnn(std::span<const Var> inputs, size_t batch) const {
  Var h = Constant(DenseArray::Matrix(batch, config_.hidden));
  for (const Var& x : inputs) h = rnn_.Step(x, h);
  return h;
}

Var ReceiverAgent::Represent(std::span<const Var> symbols) const {
  if (symbols.empty()) throw std::invalid_argument("receiver: empty message");
  std::vector<Var> inputs;
  for (const Var& s : symbols) inputs.push_back(embedding_.LookupSoft(s));
  return RunRnn(inputs, symbols[0]->value().rows());
}

Var ReceiverAgent::Represent(const std::vector<std::vector<int>>& symbols) const {
  if (symbols.empty()) throw std::invalid_argument("receiver: empty message");
  std::vector<Var> inputs;
  for (const auto& step : symbols) inputs.push_back(embedding_.Lookup(step));
  return RunRnn(inputs, symbols[0].size());
}

Var ReceiverAgent::Score(const Var& representation, const DenseArray& first,
                         const DenseArray& second) const {
  const Var columns[] = {
      SumLastAxis(Mul(candidate_encoder_.Forward(Constant(first)), representation)),
      SumLastAxis(
          Mul(candidate_encoder_.Forward(Constant(second)), representation))};
  return Concat(columns);
}

ParameterSet ReceiverAgent::Parameters() const {
  ParameterSet params;
  embedding_.Register(params, "receiver.embedding");
  rnn_.Register(params, "receiver.rnn");
  candidate_encoder_.Register(params, "receiver.candidate_encoder");
  return params;
}

std::vector<int> ChooseCandidates(const DenseArray& scores) {
  std::vector<int> choices(scores.rows());
  for (size_t r = 0; r < scores.rows(); ++r) {
    choices[r] = scores.at(r, 1) > scores.at(r, 0) ? 1 : 0;
  }
  return choices;
}

std::vector<DenseArray> SampleMessageNoise(const AgentConfig& config,
                                           size_t batch, RngStream& rng) {
  std::vector<DenseArray> noise;
  for (size_t t = 0; t < config.message_length; ++t) {
    noise.push_back(SampleGumbelNoise(batch, config.vocab, rng));
  }
  return noise;
}

RoundsResult PlayRounds(const SenderAgent& sender, const ReceiverAgent& receiver,
                        std::span<const GameInstance> instances,
                        const EnvironmentSpec& spec,
                        const ChannelConfig& channel, SenderMode mode,
                        std::span<const DenseArray> noise) {
  if (instances.empty()) throw std::invalid_argument("PlayRounds: no instances");
  const size_t batch = instances.size();
  std::vector<ObjectVector> targets, first, second;
  targets.reserve(batch);
  first.reserve(batch);
  second.reserve(batch);
  DenseArray label_mask = DenseArray::Matrix(batch, 2);
  for (size_t b = 0; b < batch; ++b) {
    const GameInstance& instance = instances[b];
    targets.push_back(instance.target);
    first.push_back(instance.candidate(0));
    second.push_back(instance.candidate(1));
    label_mask.at(b, static_cast<size_t>(instance.label)) = 1.0;
  }

  RoundsResult result;
  result.message = sender.Forward(OneHotEncodeBatch(targets, spec), mode,
                                  channel, noise);
  const Var representation = (mode == SenderMode::kTrain)
                                 ? receiver.Represent(result.message.symbols)
                                 : receiver.Represent(result.message.hard);
  result.scores = receiver.Score(representation, OneHotEncodeBatch(first, spec),
                                 OneHotEncodeBatch(second, spec));
  result.loss = Scale(Sum(Mul(LogSoftmax(result.scores), Constant(label_mask))),
                      -1.0 / static_cast<double>(batch));
  result.finite = std::isfinite(result.loss->value().item());
  result.choices = ChooseCandidates(result.scores->value());
  for (size_t b = 0; b < batch; ++b) {
    result.n_correct += (result.choices[b] == instances[b].label);
  }
  return result;
}

}  // namespace emcomm
