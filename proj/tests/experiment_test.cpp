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

#include "emcomm/experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace emcomm {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "emcomm_experiment_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small enough to train in well under a second.
ExperimentConfig TinyConfig() {
  ExperimentConfig c;
  c.n_features = 3;
  c.n_values = 3;
  c.sizes = {1200, 200, 300};
  c.vocab = 16;
  c.hidden = 16;
  c.embed = 8;
  c.batch_size = 32;
  c.sender_lr = c.receiver_lr = 0.01;
  c.epochs = 6;
  c.dataset_seeds = {1};
  c.network_seeds = {1};
  return c;
}

RunRecord FakeRecord(double accuracy, bool converged, uint64_t seed = 1) {
  RunRecord r;
  r.preset = "uniform";
  r.network_seed = seed;
  r.metrics.accuracy = accuracy;
  r.metrics.unique_messages = 10;
  r.metrics.feature_mi = {0.5, 0.25};
  r.converged = r.metrics.converged = converged;
  return r;
}

TEST(ExperimentConfig, Defaults) {
  const ExperimentConfig c;
  EXPECT_EQ(c.preset, Preset::kUniform);
  EXPECT_EQ(c.n_features, 5);
  EXPECT_EQ(c.n_values, 4);
  EXPECT_EQ(c.sizes, (SplitSizes{128000, 16000, 4000}));
  EXPECT_EQ(c.vocab, 1100u);
  EXPECT_EQ(c.message_length, 1u);
  EXPECT_EQ(c.hidden, 50u);
  EXPECT_EQ(c.embed, 10u);
  EXPECT_EQ(c.temperature, 1.0);
  EXPECT_EQ(c.batch_size, 64u);
  EXPECT_EQ(c.sender_lr, 0.001);
  EXPECT_EQ(c.receiver_lr, 0.001);
  EXPECT_EQ(c.epochs, 50u);
  EXPECT_EQ(c.dataset_seeds.size() * c.network_seeds.size(), 10u);
  EXPECT_EQ(c.convergence_threshold, 0.9);
  EXPECT_NO_THROW(c.Validate());
}

TEST(ExperimentConfig, ParsesValues) {
  ExperimentConfig c;
  ApplyConfigValue(c, "preset", "skewed");
  ApplyConfigValue(c, "vocab", " 200 ");
  ApplyConfigValue(c, "sender_lr", "5e-4");
  ApplyConfigValue(c, "straight_through", "off");
  ApplyConfigValue(c, "network_seeds", "1, 3-5,9");
  EXPECT_EQ(c.preset, Preset::kSkewed);
  EXPECT_EQ(c.vocab, 200u);
  EXPECT_EQ(c.sender_lr, 5e-4);
  EXPECT_FALSE(c.straight_through);
  EXPECT_EQ(c.network_seeds, (std::vector<uint64_t>{1, 3, 4, 5, 9}));
}

TEST(ExperimentConfig, RejectsInvalidValues) {
  ExperimentConfig c;
  EXPECT_THROW(ApplyConfigValue(c, "vocab", "-3"), ConfigError);
  EXPECT_THROW(ApplyConfigValue(c, "vocab", "12abc"), ConfigError);
  EXPECT_THROW(ApplyConfigValue(c, "temperature", "warm"), ConfigError);
  EXPECT_THROW(ApplyConfigValue(c, "straight_through", "maybe"), ConfigError);
  EXPECT_THROW(ApplyConfigValue(c, "network_seeds", "5-2"), ConfigError);
  EXPECT_THROW(ApplyConfigValue(c, "colour", "blue"), ConfigError);
  EXPECT_THROW(ApplyConfigValue(c, "preset", "bimodal"), ConfigError);

  auto invalid = [](auto mutate) {
    ExperimentConfig x;
    mutate(x);
    EXPECT_THROW(x.Validate(), ConfigError);
  };
  invalid([](ExperimentConfig& x) { x.vocab = 0; });
  invalid([](ExperimentConfig& x) { x.hidden = 0; });
  invalid([](ExperimentConfig& x) { x.temperature = 0.0; });
  invalid([](ExperimentConfig& x) { x.sender_lr = -1e-3; });
  invalid([](ExperimentConfig& x) { x.batch_size = 0; });
  invalid([](ExperimentConfig& x) { x.sizes.test = 0; });
  invalid([](ExperimentConfig& x) { x.network_seeds.clear(); });
  invalid([](ExperimentConfig& x) { x.dataset_seeds.clear(); });
  invalid([](ExperimentConfig& x) { x.convergence_threshold = 1.5; });
  invalid([](ExperimentConfig& x) { x.preset = Preset::kCustom; });
  invalid([](ExperimentConfig& x) {
    x.preset = Preset::kSkewed;
    x.n_values = 3;
  });
  ExperimentConfig baseline;
  baseline.epochs = 0;
  EXPECT_NO_THROW(baseline.Validate());
}

TEST(ExperimentConfig, KeyValuesRoundTrip) {
  ExperimentConfig a = TinyConfig();
  a.preset = Preset::kSkewed;
  a.n_values = 4;
  a.temperature = 0.7;
  a.straight_through = false;
  a.network_seeds = {4, 8};
  a.output_dir = "elsewhere";
  ExperimentConfig b;
  for (const auto& [k, v] : a.ToKeyValues()) ApplyConfigValue(b, k, v);
  EXPECT_EQ(a.ToKeyValues(), b.ToKeyValues());
  EXPECT_EQ(a.Fingerprint(), b.Fingerprint());
}

TEST(ExperimentConfig, FingerprintCoversOnlyRunDefiningFields) {
  const ExperimentConfig a;
  ExperimentConfig b;
  b.network_seeds = {7};
  b.output_dir = "other";
  b.jobs = 4;
  EXPECT_EQ(a.Fingerprint(), b.Fingerprint());
  b.receiver_lr = 0.002;
  EXPECT_NE(a.Fingerprint(), b.Fingerprint());
  ExperimentConfig c;
  c.preset = Preset::kSkewed;
  EXPECT_NE(a.Fingerprint(), c.Fingerprint());
  EXPECT_EQ(a.Fingerprint().size(), 16u);
}

TEST(ExperimentConfig, ConfigFileAndCustomEnvironment) {
  const fs::path dir = TempDir("config");
  std::ofstream(dir / "env.txt") << "0.5 0.5\n0.9 0.1\n0.2 0.8\n";
  std::ofstream(dir / "run.cfg") << "# tiny custom run\n"
                                 << "preset = custom\n"
                                 << "environment_file = " << (dir / "env.txt").string() << "\n"
                                 << "n_features = 3\nn_values = 2   # binary\n\n"
                                 << "epochs=3\n";
  const ExperimentConfig c = LoadConfigFile(dir / "run.cfg");
  EXPECT_EQ(c.preset, Preset::kCustom);
  EXPECT_EQ(c.epochs, 3u);
  EXPECT_EQ(c.Environment().probabilities[1], (std::vector<double>{0.9, 0.1}));
  EXPECT_NO_THROW(c.Validate());

  ExperimentConfig mismatched = c;
  mismatched.n_features = 4;
  EXPECT_THROW(mismatched.Validate(), ConfigError);
  std::ofstream(dir / "bad.cfg") << "epochs 3\n";
  EXPECT_THROW(LoadConfigFile(dir / "bad.cfg"), ConfigError);
  EXPECT_THROW(LoadConfigFile(dir / "absent.cfg"), ConfigError);
}

TEST(Aggregate, SingleRecordHasZeroStd) {
  const RunRecord r = FakeRecord(0.95, true);
  const SummaryTable t = Aggregate(std::span(&r, 1));
  EXPECT_EQ(t.Get("accuracy").mean, 0.95);
  EXPECT_EQ(t.Get("accuracy").std, 0.0);
  EXPECT_EQ(t.n_runs, 1u);
  EXPECT_EQ(t.n_converged, 1u);
}

TEST(Aggregate, SampleStandardDeviation) {
  const std::vector<RunRecord> records = {FakeRecord(0.6, true), FakeRecord(0.8, true)};
  const SummaryTable t = Aggregate(records);
  EXPECT_NEAR(t.Get("accuracy").mean, 0.7, 1e-15);
  EXPECT_NEAR(t.Get("accuracy").std, std::sqrt(0.02), 1e-15);  // 0.1414...
  EXPECT_NEAR(t.Get("accuracy").std, 0.1414, 1e-4);
  EXPECT_EQ(t.Get("mi_feature_2").mean, 0.25);
  EXPECT_THROW(t.Get("mi_feature_3"), std::out_of_range);
}

TEST(Aggregate, ExcludesUnconvergedRuns) {
  std::vector<RunRecord> records;
  for (int i = 0; i < 4; ++i) records.push_back(FakeRecord(0.96, true, i));
  records.push_back(FakeRecord(0.5, false, 9));
  records.back().diverged = true;
  const SummaryTable t = Aggregate(records);
  EXPECT_EQ(t.n_runs, 5u);
  EXPECT_EQ(t.n_converged, 4u);
  EXPECT_EQ(t.n_runs - t.n_converged, 1u);
  EXPECT_DOUBLE_EQ(t.Get("accuracy").mean, 0.96);
  const std::vector<RunRecord> none = {FakeRecord(0.5, false)};
  EXPECT_THROW(Aggregate(none), std::invalid_argument);
}

TEST(Aggregate, SummaryCsvColumns) {
  const std::vector<RunRecord> records = {FakeRecord(0.6, true), FakeRecord(0.8, true)};
  const SummaryTable tables[] = {Aggregate(records)};
  const fs::path path = TempDir("csv") / "summary.csv";
  WriteSummaryCsv(path, tables);
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "preset,metric,mean,std,n_runs,n_converged");
  EXPECT_EQ(first.rfind("uniform,accuracy,0.7,", 0), 0u) << first;
  EXPECT_EQ(first.substr(first.size() - 4), ",2,2");
}

TEST(RunRecord, JsonRoundTripIsExact) {
  RunRecord r = FakeRecord(1.0 / 3.0, true, 4);
  r.config_fingerprint = "0123456789abcdef";
  r.dataset_seed = 2;
  r.train_loss = {0.6931471805599453, 1e-300};
  r.valid_accuracy = {0.5, 0.987654321};
  r.metrics.message_entropy = 5.4321;
  r.wall_seconds = 12.5;
  r.error = "quote \" and newline \n";
  const RunRecord back = RunRecordFromJson(RunRecordToJson(r));
  EXPECT_TRUE(SameOutcome(r, back));
  EXPECT_EQ(back.wall_seconds, 12.5);
  const fs::path path = TempDir("record") / "r.json";
  WriteRunRecord(path, r);
  EXPECT_TRUE(SameOutcome(ReadRunRecord(path), r));
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
  EXPECT_THROW(RunRecordFromJson(R"({"schema":"other"})"), std::invalid_argument);
}

TEST(Training, RecordsFullCurvesAndLearns) {
  const ExperimentConfig c = TinyConfig();
  const RunRecord r = TrainRun(c, 1, 1);
  EXPECT_EQ(r.train_loss.size(), c.epochs);
  EXPECT_EQ(r.valid_accuracy.size(), c.epochs);
  EXPECT_FALSE(r.diverged);
  EXPECT_LT(r.train_loss.back(), r.train_loss.front());
  EXPECT_GT(r.metrics.accuracy, 0.8);
  EXPECT_EQ(r.metrics.feature_mi.size(), 3u);
  EXPECT_EQ(r.config_fingerprint, c.Fingerprint());
  EXPECT_GT(r.wall_seconds, 0.0);
}

TEST(Training, IdenticalSeedsReproduceIdenticalRecords) {
  const ExperimentConfig c = TinyConfig();
  const RunRecord a = TrainRun(c, 2, 3);
  const RunRecord b = TrainRun(c, 2, 3);
  EXPECT_TRUE(SameOutcome(a, b));
  const RunRecord other = TrainRun(c, 2, 4);
  EXPECT_NE(a.train_loss, other.train_loss);
}

TEST(Training, NetworkSeedDoesNotChangeTheData) {
  const ExperimentConfig c = TinyConfig();
  const TrainedRun a = TrainAgents(c, 5, 1);
  const TrainedRun b = TrainAgents(c, 5, 2);
  EXPECT_EQ(a.data.train, b.data.train);
  EXPECT_EQ(a.data.test, b.data.test);
  EXPECT_EQ(a.record.metrics.unique_targets, b.record.metrics.unique_targets);
}

TEST(Training, ZeroEpochsIsChanceLevel) {
  ExperimentConfig c = TinyConfig();
  c.epochs = 0;
  c.sizes.test = 4000;
  // A single random network is biased either way; the average is not.
  double mean = 0.0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const RunRecord r = TrainRun(c, 1, seed);
    EXPECT_TRUE(r.train_loss.empty());
    mean += r.metrics.accuracy / 10.0;
  }
  EXPECT_NEAR(mean, 0.5, 0.03);
}

TEST(Training, NonFiniteLossStopsTheRunAndIsFlagged) {
  ExperimentConfig c = TinyConfig();
  c.temperature = 1e-320;  // logits / temperature overflow
  const RunRecord r = TrainRun(c, 1, 1);
  EXPECT_TRUE(r.diverged);
  EXPECT_FALSE(r.converged);
  EXPECT_LT(r.train_loss.size(), c.epochs);
}

TEST(Training, CheckpointRestoresTheTrainedAgents) {
  const ExperimentConfig c = TinyConfig();
  const TrainedRun run = TrainAgents(c, 1, 2);
  const fs::path path = TempDir("ckpt") / "run.ckpt";
  SaveRunCheckpoint(path, c, 1, 2, *run.sender, *run.receiver);
  const RestoredRun restored = LoadRunCheckpoint(path);
  EXPECT_EQ(restored.config.Fingerprint(), c.Fingerprint());
  EXPECT_EQ(restored.dataset_seed, 1u);
  EXPECT_EQ(restored.network_seed, 2u);
  RunMetrics m = ProtocolStats(restored.sender, restored.receiver, run.data.test,
                               c.Environment());
  m.converged = run.record.metrics.converged;
  EXPECT_EQ(m, run.record.metrics);
}

TEST(Sweep, RunsTheSeedGridInParallelDeterministically) {
  ExperimentConfig c = TinyConfig();
  c.epochs = 2;
  c.dataset_seeds = {1, 2};
  c.network_seeds = {1, 2, 3};
  c.convergence_threshold = 0.0;
  c.output_dir = TempDir("sweep_serial");
  const SweepResult serial = RunSweep(c);
  ASSERT_EQ(serial.records.size(), 6u);
  EXPECT_EQ(serial.records[4].dataset_seed, 2u);
  EXPECT_EQ(serial.records[4].network_seed, 2u);

  c.jobs = 3;
  c.output_dir = TempDir("sweep_parallel");
  const SweepResult parallel = RunSweep(c);
  for (size_t i = 0; i < 6; ++i) {
    EXPECT_TRUE(SameOutcome(serial.records[i], parallel.records[i])) << i;
  }
  ASSERT_TRUE(serial.summary.has_value());
  EXPECT_EQ(serial.summary->n_runs, 6u);
  EXPECT_TRUE(fs::exists(c.output_dir / "summary.csv"));

  // The summary recomputed from the persisted records equals the in-process one.
  const auto reloaded = LoadRunRecords(c.output_dir / "runs");
  ASSERT_EQ(reloaded.size(), 6u);
  const SummaryTable again = Aggregate(reloaded);
  for (size_t k = 0; k < again.metrics.size(); ++k) {
    EXPECT_EQ(again.metrics[k].mean, parallel.summary->metrics[k].mean);
    EXPECT_EQ(again.metrics[k].std, parallel.summary->metrics[k].std);
  }
}

TEST(Sweep, ResumeReusesMatchingRecordsOnly) {
  ExperimentConfig c = TinyConfig();
  c.epochs = 1;
  c.network_seeds = {1, 2};
  c.output_dir = TempDir("sweep_resume");
  SweepOptions save;
  save.save_checkpoints = true;
  SweepOptions resume;
  resume.resume = true;
  const SweepResult first = RunSweep(c, save);
  EXPECT_TRUE(fs::exists(fs::path(RunRecordPath(c, 1, 1)).replace_extension(".ckpt")));

  // Mark a stored record so that reuse is observable.
  RunRecord marked = first.records[0];
  marked.wall_seconds = -1.0;
  WriteRunRecord(RunRecordPath(c, 1, 1), marked);
  const SweepResult resumed = RunSweep(c, resume);
  EXPECT_EQ(resumed.records[0].wall_seconds, -1.0);
  EXPECT_TRUE(SameOutcome(resumed.records[1], first.records[1]));

  // A different configuration writes to a different record file.
  ExperimentConfig changed = c;
  changed.sender_lr = 0.02;
  EXPECT_NE(RunRecordPath(changed, 1, 1), RunRecordPath(c, 1, 1));
  const SweepResult fresh = RunSweep(changed, resume);
  EXPECT_NE(fresh.records[0].wall_seconds, -1.0);
}

TEST(Sweep, NoConvergedRunLeavesSummaryEmpty) {
  ExperimentConfig c = TinyConfig();
  c.epochs = 0;
  c.network_seeds = {1, 2};
  c.convergence_threshold = 1.0;
  c.output_dir = TempDir("sweep_none");
  const SweepResult r = RunSweep(c);
  EXPECT_EQ(r.records.size(), 2u);
  EXPECT_FALSE(r.summary.has_value());
  EXPECT_FALSE(fs::exists(c.output_dir / "summary.csv"));
}

}  // namespace
}  // namespace emcomm
