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

#include <benchmark/benchmark.h>

#include <vector>

#include "emcomm/adam.hpp"
#include "emcomm/agents.hpp"
#include "emcomm/autodiff.hpp"
#include "emcomm/environment.hpp"
#include "emcomm/infotheory.hpp"
#include "emcomm/rng.hpp"

namespace emcomm {
namespace {

DenseArray RandomMatrix(size_t rows, size_t cols, RngStream& rng) {
  DenseArray a = DenseArray::Matrix(rows, cols);
  for (double& x : a.data()) x = rng.Uniform(-1, 1);
  return a;
}

void BM_MatMulForwardBackward(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  RngStream rng(1);
  const Var a = Parameter(RandomMatrix(64, 50, rng));
  const Var b = Parameter(RandomMatrix(50, n, rng));
  for (auto _ : state) {
    Backward(Sum(MatMul(a, b)));
    benchmark::DoNotOptimize(b->grad().data().data());
  }
  state.SetItemsProcessed(state.iterations() * 64 * 50 * static_cast<int64_t>(n));
}
BENCHMARK(BM_MatMulForwardBackward)->Arg(50)->Arg(1100);

void BM_GumbelNoise(benchmark::State& state) {
  RngStream rng(2);
  std::vector<double> out(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    rng.FillGumbel(out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GumbelNoise)->Arg(64 * 1100);

// One optimizer step of the default game on a 64-instance batch.
void BM_TrainStep(benchmark::State& state) {
  const AgentConfig config;
  const EnvironmentSpec spec = EnvironmentSpec::Uniform();
  const SenderAgent sender(config, RngStream(3));
  const ReceiverAgent receiver(config, RngStream(4));
  Adam sender_opt(sender.Parameters().vars(), {.lr = 1e-3});
  Adam receiver_opt(receiver.Parameters().vars(), {.lr = 1e-3});
  RngStream rng(5);
  std::vector<GameInstance> batch;
  for (int i = 0; i < 64; ++i) batch.push_back(SampleGameInstance(spec, rng));
  for (auto _ : state) {
    const auto noise = SampleMessageNoise(config, batch.size(), rng);
    sender.Parameters().ZeroGrad();
    receiver.Parameters().ZeroGrad();
    const RoundsResult r =
        PlayRounds(sender, receiver, batch, spec, {}, SenderMode::kTrain, noise);
    Backward(r.loss);
    sender_opt.Step();
    receiver_opt.Step();
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_TrainStep);

void BM_MutualInformation(benchmark::State& state) {
  RngStream rng(6);
  JointCounts joint(1100, 4);
  for (int i = 0; i < 4000; ++i) joint.Add(rng.UniformInt(60), rng.UniformInt(4));
  for (auto _ : state) benchmark::DoNotOptimize(MutualInformation(joint));
}
BENCHMARK(BM_MutualInformation);

}  // namespace
}  // namespace emcomm

BENCHMARK_MAIN();
