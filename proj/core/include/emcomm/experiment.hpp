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

// Experiment configuration, the training loop, seed sweeps and their
// aggregation.

#ifndef EMCOMM_EXPERIMENT_HPP_
#define EMCOMM_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "emcomm/agents.hpp"
#include "emcomm/channel.hpp"
#include "emcomm/environment.hpp"
#include "emcomm/protocol.hpp"

namespace emcomm {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Preset { kUniform, kSkewed, kCustom };

std::string PresetName(Preset preset);
Preset ParsePreset(const std::string& name);

struct ExperimentConfig {
  Preset preset = Preset::kUniform;
  // Probability file, used when preset is kCustom.
  std::filesystem::path environment_file;
  // Takes precedence over environment_file when non-empty (checkpoints carry
  // their probabilities inline).
  std::vector<std::vector<double>> custom_probabilities;
  int n_features = 5;
  int n_values = 4;
  SplitSizes sizes;
  size_t vocab = 1100;
  size_t message_length = 1;
  size_t hidden = 50;
  size_t embed = 10;
  double temperature = 1.0;
  bool straight_through = true;
  size_t batch_size = 64;
  double sender_lr = 1e-3;
  double receiver_lr = 1e-3;
  size_t epochs = 50;
  std::vector<uint64_t> dataset_seeds = {1, 2};
  std::vector<uint64_t> network_seeds = {1, 2, 3, 4, 5};
  // Runs whose final test accuracy falls below this are not converged.
  double convergence_threshold = 0.9;
  std::filesystem::path output_dir = "results";
  size_t jobs = 1;

  // Throws ConfigError.
  void Validate() const;
  EnvironmentSpec Environment() const;
  AgentConfig Agents() const;
  ChannelConfig Channel() const;

  // Ordered key/value view; keys match the config file and CLI flag names.
  std::vector<std::pair<std::string, std::string>> ToKeyValues() const;
  // Hex digest of every field that influences a single run's outcome (seed
  // lists, output directory and job count excluded).
  std::string Fingerprint() const;
};

// Sets one field from its textual form. Throws ConfigError for unknown keys
// or unparsable values.
void ApplyConfigValue(ExperimentConfig& config, const std::string& key,
                      const std::string& value);

// "key = value" lines; blank lines and '#' comments ignored.
ExperimentConfig LoadConfigFile(const std::filesystem::path& path,
                                ExperimentConfig base = {});

struct RunRecord {
  std::string config_fingerprint;
  std::string preset;
  uint64_t dataset_seed = 0;
  uint64_t network_seed = 0;
  // One entry per completed epoch.
  std::vector<double> train_loss;
  std::vector<double> valid_accuracy;
  RunMetrics metrics;
  double wall_seconds = 0.0;
  bool converged = false;
  // A non-finite loss or gradient stopped the run early.
  bool diverged = false;
  // Set when the run threw instead of finishing.
  std::string error;
};

// Equality of everything except wall-clock time.
bool SameOutcome(const RunRecord& a, const RunRecord& b);

std::string RunRecordToJson(const RunRecord& record);
RunRecord RunRecordFromJson(const std::string& json);
void WriteRunRecord(const std::filesystem::path& path, const RunRecord& record);
RunRecord ReadRunRecord(const std::filesystem::path& path);
// Every *.json record in `dir`, sorted by file name.
std::vector<RunRecord> LoadRunRecords(const std::filesystem::path& dir);

struct TrainedRun {
  RunRecord record;
  std::optional<SenderAgent> sender;
  std::optional<ReceiverAgent> receiver;
  DatasetSplits data;
};

struct TrainHooks {
  std::function<void(size_t epoch, double train_loss, double valid_accuracy)>
      on_epoch;
};

// Builds the dataset from `dataset_seed`, initializes both agents from
// `network_seed` and trains them jointly for config.epochs epochs of shuffled
// mini-batches, then evaluates on the test split.
TrainedRun TrainAgents(const ExperimentConfig& config, uint64_t dataset_seed,
                       uint64_t network_seed, const TrainHooks& hooks = {});
RunRecord TrainRun(const ExperimentConfig& config, uint64_t dataset_seed,
                   uint64_t network_seed, const TrainHooks& hooks = {});

// Agents rebuilt from a checkpoint written by SaveRunCheckpoint.
struct RestoredRun {
  ExperimentConfig config;
  uint64_t dataset_seed = 0;
  uint64_t network_seed = 0;
  SenderAgent sender;
  ReceiverAgent receiver;
};
void SaveRunCheckpoint(const std::filesystem::path& path,
                       const ExperimentConfig& config, uint64_t dataset_seed,
                       uint64_t network_seed, const SenderAgent& sender,
                       const ReceiverAgent& receiver);
RestoredRun LoadRunCheckpoint(const std::filesystem::path& path);

struct MetricSummary {
  std::string metric;
  double mean = 0.0;
  // Sample (n - 1) standard deviation; 0 for a single run.
  double std = 0.0;
};

struct SummaryTable {
  std::string preset;
  size_t n_runs = 0;
  size_t n_converged = 0;
  std::vector<MetricSummary> metrics;

  // Throws std::out_of_range for an unknown metric.
  const MetricSummary& Get(const std::string& metric) const;
};

// Names in SummaryTable order: accuracy, unique_messages, message_entropy,
// unique_targets, target_entropy, mi_feature_1 ... mi_feature_n.
std::vector<std::string> MetricNames(size_t n_features);
std::vector<double> MetricValues(const RunMetrics& metrics);

// Mean and sample std of every metric over converged records. Throws
// std::invalid_argument when no record converged.
SummaryTable Aggregate(std::span<const RunRecord> records);

// Columns: preset,metric,mean,std,n_runs,n_converged.
void WriteSummaryCsv(const std::filesystem::path& path,
                     std::span<const SummaryTable> tables);

struct SweepOptions {
  // Reuse existing record files with a matching fingerprint; records of runs
  // that threw are retrained.
  bool resume = false;
  // Also write <run>.ckpt next to every record.
  bool save_checkpoints = false;
  std::function<void(const RunRecord&)> on_run;
};

struct SweepResult {
  // Ordered dataset seed major, network seed minor.
  std::vector<RunRecord> records;
  // Empty when no run converged.
  std::optional<SummaryTable> summary;
};

// Every (dataset seed, network seed) pair of the config, on up to
// config.jobs threads. Records go to <output_dir>/runs/, the summary to
// <output_dir>/summary.csv. A failing run is recorded, never fatal.
SweepResult RunSweep(const ExperimentConfig& config,
                     const SweepOptions& options = {});

std::filesystem::path RunRecordPath(const ExperimentConfig& config,
                                    uint64_t dataset_seed,
                                    uint64_t network_seed);

}  // namespace emcomm

#endif  // EMCOMM_EXPERIMENT_HPP_
