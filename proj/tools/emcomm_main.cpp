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

// emcomm: dataset generation, training, sweeps and protocol analysis.
//
// Exit codes: 0 success, 1 invalid configuration or usage, 2 no run
// converged (every run diverged or fell below the convergence threshold),
// 3 runtime failure.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emcomm/environment.hpp"
#include "emcomm/experiment.hpp"
#include "emcomm/protocol.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNoneConverged = 2;
constexpr int kExitRuntime = 3;

std::string FlagName(const std::string& key) {
  std::string flag = key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  return "--" + flag;
}

// Config flags shared by every subcommand. Values stay textual so the config
// file and the command line go through the same parser.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void Register(CLI::App* app) {
    app->add_option("-c,--config", config_file,
                    "key = value file applied before flags");
    const emcomm::ExperimentConfig defaults;
    for (const auto& [key, value] : defaults.ToKeyValues()) {
      app->add_option(FlagName(key), values[key], key)
          ->default_str(value)
          ->type_name("TEXT");
    }
  }

  emcomm::ExperimentConfig Resolve(const CLI::App* app) const {
    emcomm::ExperimentConfig config;
    if (!config_file.empty()) config = emcomm::LoadConfigFile(config_file);
    for (const auto& [key, value] : values) {
      if (app->count(FlagName(key)) > 0) {
        emcomm::ApplyConfigValue(config, key, value);
      }
    }
    config.Validate();
    return config;
  }
};

void PrintRun(const emcomm::RunRecord& r) {
  std::fprintf(stderr,
               "run %s d=%llu n=%llu: acc=%.4f msgs=%lld H(m)=%.3f "
               "converged=%d diverged=%d %.1fs%s%s\n",
               r.preset.c_str(), static_cast<unsigned long long>(r.dataset_seed),
               static_cast<unsigned long long>(r.network_seed),
               r.metrics.accuracy,
               static_cast<long long>(r.metrics.unique_messages),
               r.metrics.message_entropy, r.converged ? 1 : 0,
               r.diverged ? 1 : 0, r.wall_seconds, r.error.empty() ? "" : " ",
               r.error.c_str());
}

void PrintSummary(const emcomm::SummaryTable& table) {
  std::printf("preset %s: %zu runs, %zu converged\n", table.preset.c_str(),
              table.n_runs, table.n_converged);
  for (const auto& m : table.metrics) {
    std::printf("  %-16s %12.6f +- %.6f\n", m.metric.c_str(), m.mean, m.std);
  }
}

emcomm::TrainHooks VerboseHooks(bool verbose) {
  emcomm::TrainHooks hooks;
  if (verbose) {
    hooks.on_epoch = [](size_t epoch, double loss, double acc) {
      std::fprintf(stderr, "epoch %3zu loss %.5f valid_acc %.4f\n", epoch + 1,
                   loss, acc);
    };
  }
  return hooks;
}

int Generate(const emcomm::ExperimentConfig& config, uint64_t seed,
             const fs::path& out) {
  const auto data = emcomm::BuildDataset(config.Environment(), config.sizes, seed);
  emcomm::WriteDataset(out, data, config.Environment());
  std::printf("wrote %s/{train,valid,test}.txt\n", out.string().c_str());
  return kExitOk;
}

int Train(const emcomm::ExperimentConfig& config, std::optional<uint64_t> dseed,
          std::optional<uint64_t> nseed, bool verbose, bool dump) {
  const uint64_t d = dseed.value_or(config.dataset_seeds.front());
  const uint64_t n = nseed.value_or(config.network_seeds.front());
  auto run = emcomm::TrainAgents(config, d, n, VerboseHooks(verbose));
  const fs::path record_path = emcomm::RunRecordPath(config, d, n);
  fs::create_directories(record_path.parent_path());
  emcomm::WriteRunRecord(record_path, run.record);
  fs::path ckpt = record_path;
  ckpt.replace_extension(".ckpt");
  emcomm::SaveRunCheckpoint(ckpt, config, d, n, *run.sender, *run.receiver);
  if (dump) {
    fs::path tsv = record_path;
    tsv.replace_extension(".messages.tsv");
    emcomm::WriteMessageTable(
        tsv, emcomm::DumpMessageTable(*run.sender, config.Environment()));
  }
  PrintRun(run.record);
  std::printf("%s\n", record_path.string().c_str());
  return run.record.converged ? kExitOk : kExitNoneConverged;
}

int Sweep(const emcomm::ExperimentConfig& config, bool resume,
          bool checkpoints) {
  emcomm::SweepOptions options;
  options.resume = resume;
  options.save_checkpoints = checkpoints;
  options.on_run = PrintRun;
  const auto result = emcomm::RunSweep(config, options);
  if (!result.summary) {
    std::fprintf(stderr, "no run converged\n");
    return kExitNoneConverged;
  }
  PrintSummary(*result.summary);
  return kExitOk;
}

// Records: groups by preset and rewrites summary.csv. Checkpoints: recomputes
// RunMetrics on the test split rebuilt from the stored dataset seed.
int Analyze(const std::vector<std::string>& inputs, const fs::path& out) {
  std::vector<emcomm::RunRecord> records;
  for (const auto& input : inputs) {
    const fs::path path(input);
    if (fs::is_directory(path)) {
      fs::path runs = path / "runs";
      auto loaded = emcomm::LoadRunRecords(fs::is_directory(runs) ? runs : path);
      records.insert(records.end(), loaded.begin(), loaded.end());
    } else if (path.extension() == ".ckpt") {
      auto restored = emcomm::LoadRunCheckpoint(path);
      const auto spec = restored.config.Environment();
      const auto data = emcomm::BuildDataset(spec, restored.config.sizes,
                                             restored.dataset_seed);
      emcomm::RunRecord r;
      r.config_fingerprint = restored.config.Fingerprint();
      r.preset = emcomm::PresetName(restored.config.preset);
      r.dataset_seed = restored.dataset_seed;
      r.network_seed = restored.network_seed;
      r.metrics = emcomm::ProtocolStats(restored.sender, restored.receiver,
                                        data.test, spec);
      r.converged =
          r.metrics.accuracy >= restored.config.convergence_threshold;
      r.metrics.converged = r.converged;
      std::printf("%s\n", emcomm::RunRecordToJson(r).c_str());
      records.push_back(std::move(r));
    } else {
      records.push_back(emcomm::ReadRunRecord(path));
    }
  }
  std::map<std::string, std::vector<emcomm::RunRecord>> by_preset;
  for (auto& r : records) by_preset[r.preset].push_back(std::move(r));
  std::vector<emcomm::SummaryTable> tables;
  for (const auto& [preset, group] : by_preset) {
    const bool any = std::any_of(group.begin(), group.end(),
                                 [](const auto& r) { return r.converged; });
    if (!any) {
      std::fprintf(stderr, "preset %s: no converged run among %zu\n",
                   preset.c_str(), group.size());
      continue;
    }
    tables.push_back(emcomm::Aggregate(group));
    PrintSummary(tables.back());
  }
  if (tables.empty()) return kExitNoneConverged;
  if (!out.empty()) emcomm::WriteSummaryCsv(out, tables);
  return kExitOk;
}

int DumpProtocol(const fs::path& checkpoint, const fs::path& out) {
  auto restored = emcomm::LoadRunCheckpoint(checkpoint);
  const auto rows =
      emcomm::DumpMessageTable(restored.sender, restored.config.Environment());
  if (out.empty() || out == "-") {
    for (const auto& row : rows) {
      std::printf("%s\t", row.object.ToString().c_str());
      for (size_t t = 0; t < row.symbols.size(); ++t) {
        std::printf(t ? ",%d" : "%d", row.symbols[t]);
      }
      std::printf("\n");
    }
  } else {
    emcomm::WriteMessageTable(out, rows);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-agent referential game: data, training and analysis"};
  app.require_subcommand(1);

  ConfigFlags gen_flags, train_flags, sweep_flags;

  auto* gen = app.add_subcommand("generate", "write train/valid/test files");
  gen_flags.Register(gen);
  std::optional<uint64_t> gen_seed;
  std::string gen_out = "data";
  gen->add_option("--seed", gen_seed, "dataset seed (default: first of dataset_seeds)");
  gen->add_option("-o,--out", gen_out, "output directory")->capture_default_str();

  auto* train = app.add_subcommand("train", "train one (dataset, network) seed pair");
  train_flags.Register(train);
  std::optional<uint64_t> dseed, nseed;
  bool verbose = false, dump = false;
  train->add_option("--dataset-seed", dseed, "default: first of dataset_seeds");
  train->add_option("--network-seed", nseed, "default: first of network_seeds");
  train->add_flag("-v,--verbose", verbose, "print per-epoch curves");
  train->add_flag("--dump-protocol", dump, "also write the message table");

  auto* sweep = app.add_subcommand("sweep", "train every dataset x network seed pair");
  sweep_flags.Register(sweep);
  bool resume = false, checkpoints = false;
  sweep->add_flag("--resume", resume, "reuse matching run records");
  sweep->add_flag("--checkpoints", checkpoints, "save agent checkpoints");

  auto* analyze = app.add_subcommand(
      "analyze", "summarize run records, result directories or checkpoints");
  std::vector<std::string> inputs;
  std::string analyze_out;
  analyze->add_option("inputs", inputs, "record files, directories or .ckpt files")
      ->required();
  analyze->add_option("-o,--out", analyze_out, "summary.csv destination");

  auto* dump_cmd = app.add_subcommand("dump-protocol",
                                      "object -> message table of a checkpoint");
  std::string ckpt, dump_out;
  dump_cmd->add_option("checkpoint", ckpt, "checkpoint file")->required();
  dump_cmd->add_option("-o,--out", dump_out, "TSV destination (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      const auto config = gen_flags.Resolve(gen);
      return Generate(config, gen_seed.value_or(config.dataset_seeds.front()),
                      gen_out);
    }
    if (train->parsed()) {
      return Train(train_flags.Resolve(train), dseed, nseed, verbose, dump);
    }
    if (sweep->parsed()) {
      return Sweep(sweep_flags.Resolve(sweep), resume, checkpoints);
    }
    if (analyze->parsed()) return Analyze(inputs, analyze_out);
    if (dump_cmd->parsed()) return DumpProtocol(ckpt, dump_out);
  } catch (const emcomm::ConfigError& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
