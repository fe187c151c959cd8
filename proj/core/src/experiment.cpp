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

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "emcomm/adam.hpp"
#include "emcomm/checkpoint.hpp"
#include "emcomm/rng.hpp"
#include "json.hpp"

namespace emcomm {
namespace {

using nlohmann::json;

constexpr char kRecordSchema[] = "emcomm.run_record/1";
constexpr size_t kEvalChunk = 1000;

// Shortest text that parses back to the same double.
std::string FormatDouble(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T x{};
  in >> x;
  if (in.fail() || !in.eof()) {
    throw ConfigError("invalid value for " + key + ": '" + value + "'");
  }
  return x;
}

size_t ParseCount(const std::string& key, const std::string& value) {
  if (value.empty() || value[0] == '-') {
    throw ConfigError("invalid value for " + key + ": '" + value + "'");
  }
  return ParseNumber<size_t>(key, value);
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("invalid value for " + key + ": '" + value + "'");
}

// "1,2,5-8" -> {1, 2, 5, 6, 7, 8}.
std::vector<uint64_t> ParseSeeds(const std::string& key,
                                 const std::string& value) {
  std::vector<uint64_t> seeds;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      seeds.push_back(ParseNumber<uint64_t>(key, item));
      continue;
    }
    const auto lo = ParseNumber<uint64_t>(key, item.substr(0, dash));
    const auto hi = ParseNumber<uint64_t>(key, item.substr(dash + 1));
    if (hi < lo) throw ConfigError("empty seed range in " + key);
    for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  return seeds;
}

std::string JoinSeeds(const std::vector<uint64_t>& seeds) {
  std::string out;
  for (size_t i = 0; i < seeds.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(seeds[i]);
  }
  return out;
}

json MetricsToJson(const RunMetrics& m) {
  return json{{"accuracy", m.accuracy},
              {"unique_messages", m.unique_messages},
              {"message_entropy", m.message_entropy},
              {"unique_targets", m.unique_targets},
              {"target_entropy", m.target_entropy},
              {"feature_mi", m.feature_mi},
              {"converged", m.converged}};
}

RunMetrics MetricsFromJson(const json& j) {
  RunMetrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.unique_messages = j.at("unique_messages").get<int64_t>();
  m.message_entropy = j.at("message_entropy").get<double>();
  m.unique_targets = j.at("unique_targets").get<int64_t>();
  m.target_entropy = j.at("target_entropy").get<double>();
  m.feature_mi = j.at("feature_mi").get<std::vector<double>>();
  m.converged = j.at("converged").get<bool>();
  return m;
}

double EvaluateAccuracy(const SenderAgent& sender, const ReceiverAgent& receiver,
                        std::span<const GameInstance> split,
                        const EnvironmentSpec& spec) {
  NoGradScope no_grad;
  size_t correct = 0;
  for (size_t begin = 0; begin < split.size(); begin += kEvalChunk) {
    const auto chunk =
        split.subspan(begin, std::min(kEvalChunk, split.size() - begin));
    correct += PlayRounds(sender, receiver, chunk, spec, ChannelConfig{},
                          SenderMode::kGreedy)
                   .n_correct;
  }
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

std::string HeaderJson(const ExperimentConfig& config, uint64_t dataset_seed,
                       uint64_t network_seed) {
  json header;
  header["format"] = "emcomm.checkpoint/1";
  json cfg = json::object();
  for (const auto& [k, v] : config.ToKeyValues()) cfg[k] = v;
  header["config"] = cfg;
  header["config_fingerprint"] = config.Fingerprint();
  header["dataset_seed"] = dataset_seed;
  header["network_seed"] = network_seed;
  if (config.preset == Preset::kCustom) {
    header["probabilities"] = config.Environment().probabilities;
  }
  return header.dump(2);
}

}  // namespace

std::string PresetName(Preset preset) {
  switch (preset) {
    case Preset::kUniform:
      return "uniform";
    case Preset::kSkewed:
      return "skewed";
    case Preset::kCustom:
      return "custom";
  }
  return "unknown";
}

Preset ParsePreset(const std::string& name) {
  if (name == "uniform") return Preset::kUniform;
  if (name == "skewed") return Preset::kSkewed;
  if (name == "custom") return Preset::kCustom;
  throw ConfigError("unknown preset '" + name +
                    "' (expected uniform, skewed or custom)");
}

void ExperimentConfig::Validate() const {
  auto positive = [](const char* name, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw ConfigError(std::string(name) + " must be positive");
    }
  };
  positive("n_features", n_features);
  positive("n_values", n_values);
  positive("train_size", static_cast<double>(sizes.train));
  positive("valid_size", static_cast<double>(sizes.valid));
  positive("test_size", static_cast<double>(sizes.test));
  positive("vocab", static_cast<double>(vocab));
  positive("message_length", static_cast<double>(message_length));
  positive("hidden", static_cast<double>(hidden));
  positive("embed", static_cast<double>(embed));
  positive("temperature", temperature);
  positive("batch_size", static_cast<double>(batch_size));
  positive("sender_lr", sender_lr);
  positive("receiver_lr", receiver_lr);
  positive("jobs", static_cast<double>(jobs));
  if (dataset_seeds.empty() || network_seeds.empty()) {
    throw ConfigError("seed lists must be non-empty");
  }
  if (!(convergence_threshold >= 0.0 && convergence_threshold <= 1.0)) {
    throw ConfigError("convergence_threshold must lie in [0, 1]");
  }
  if (preset == Preset::kSkewed && n_values != 4) {
    throw ConfigError("the skewed preset is defined for n_values = 4");
  }
  if (preset == Preset::kCustom && environment_file.empty() &&
      custom_probabilities.empty()) {
    throw ConfigError("the custom preset needs environment_file");
  }
  try {
    const EnvironmentSpec spec = Environment();
    if (spec.NumSupportedObjects() < 2) {
      throw ConfigError("environment supports fewer than two objects");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

EnvironmentSpec ExperimentConfig::Environment() const {
  switch (preset) {
    case Preset::kUniform:
      return EnvironmentSpec::Uniform(n_features, n_values);
    case Preset::kSkewed:
      return EnvironmentSpec::Skewed(n_features);
    case Preset::kCustom: {
      EnvironmentSpec spec;
      if (custom_probabilities.empty()) {
        spec = LoadEnvironmentFile(environment_file);
      } else {
        spec.probabilities = custom_probabilities;
        spec.n_features = static_cast<int>(custom_probabilities.size());
        spec.n_values = static_cast<int>(custom_probabilities[0].size());
        spec.Validate();
      }
      if (spec.n_features != n_features || spec.n_values != n_values) {
        throw ConfigError("environment_file is " +
                          std::to_string(spec.n_features) + "x" +
                          std::to_string(spec.n_values) +
                          ", config says " + std::to_string(n_features) + "x" +
                          std::to_string(n_values));
      }
      return spec;
    }
  }
  throw ConfigError("unknown preset");
}

AgentConfig ExperimentConfig::Agents() const {
  AgentConfig agents;
  agents.n_features = n_features;
  agents.n_values = n_values;
  agents.vocab = vocab;
  agents.hidden = hidden;
  agents.embed = embed;
  agents.message_length = message_length;
  return agents;
}

ChannelConfig ExperimentConfig::Channel() const {
  return ChannelConfig{temperature, straight_through};
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::ToKeyValues()
    const {
  return {{"preset", PresetName(preset)},
          {"environment_file", environment_file.string()},
          {"n_features", std::to_string(n_features)},
          {"n_values", std::to_string(n_values)},
          {"train_size", std::to_string(sizes.train)},
          {"valid_size", std::to_string(sizes.valid)},
          {"test_size", std::to_string(sizes.test)},
          {"vocab", std::to_string(vocab)},
          {"message_length", std::to_string(message_length)},
          {"hidden", std::to_string(hidden)},
          {"embed", std::to_string(embed)},
          {"temperature", FormatDouble(temperature)},
          {"straight_through", straight_through ? "true" : "false"},
          {"batch_size", std::to_string(batch_size)},
          {"sender_lr", FormatDouble(sender_lr)},
          {"receiver_lr", FormatDouble(receiver_lr)},
          {"epochs", std::to_string(epochs)},
          {"dataset_seeds", JoinSeeds(dataset_seeds)},
          {"network_seeds", JoinSeeds(network_seeds)},
          {"convergence_threshold", FormatDouble(convergence_threshold)},
          {"output_dir", output_dir.string()},
          {"jobs", std::to_string(jobs)}};
}

std::string ExperimentConfig::Fingerprint() const {
  std::string canonical;
  for (const auto& [key, value] : ToKeyValues()) {
    if (key == "dataset_seeds" || key == "network_seeds" ||
        key == "output_dir" || key == "jobs" || key == "environment_file") {
      continue;
    }
    canonical += key + "=" + value + "\n";
  }
  if (preset == Preset::kCustom) {
    for (const auto& row : Environment().probabilities) {
      for (double p : row) canonical += FormatDouble(p) + ",";
      canonical += ";";
    }
  }
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(SplitMix64(h)));
  return buf;
}

void ApplyConfigValue(ExperimentConfig& c, const std::string& key,
                      const std::string& raw) {
  const std::string value = Trim(raw);
  if (key == "preset") {
    c.preset = ParsePreset(value);
  } else if (key == "environment_file") {
    c.environment_file = value;
  } else if (key == "n_features") {
    c.n_features = ParseNumber<int>(key, value);
  } else if (key == "n_values") {
    c.n_values = ParseNumber<int>(key, value);
  } else if (key == "train_size") {
    c.sizes.train = ParseCount(key, value);
  } else if (key == "valid_size") {
    c.sizes.valid = ParseCount(key, value);
  } else if (key == "test_size") {
    c.sizes.test = ParseCount(key, value);
  } else if (key == "vocab") {
    c.vocab = ParseCount(key, value);
  } else if (key == "message_length") {
    c.message_length = ParseCount(key, value);
  } else if (key == "hidden") {
    c.hidden = ParseCount(key, value);
  } else if (key == "embed") {
    c.embed = ParseCount(key, value);
  } else if (key == "temperature") {
    c.temperature = ParseNumber<double>(key, value);
  } else if (key == "straight_through") {
    c.straight_through = ParseBool(key, value);
  } else if (key == "batch_size") {
    c.batch_size = ParseCount(key, value);
  } else if (key == "sender_lr") {
    c.sender_lr = ParseNumber<double>(key, value);
  } else if (key == "receiver_lr") {
    c.receiver_lr = ParseNumber<double>(key, value);
  } else if (key == "epochs") {
    c.epochs = ParseCount(key, value);
  } else if (key == "dataset_seeds") {
    c.dataset_seeds = ParseSeeds(key, value);
  } else if (key == "network_seeds") {
    c.network_seeds = ParseSeeds(key, value);
  } else if (key == "convergence_threshold") {
    c.convergence_threshold = ParseNumber<double>(key, value);
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "jobs") {
    c.jobs = ParseCount(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig LoadConfigFile(const std::filesystem::path& path,
                                ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    ApplyConfigValue(base, Trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

bool SameOutcome(const RunRecord& a, const RunRecord& b) {
  return a.config_fingerprint == b.config_fingerprint && a.preset == b.preset &&
         a.dataset_seed == b.dataset_seed && a.network_seed == b.network_seed &&
         a.train_loss == b.train_loss && a.valid_accuracy == b.valid_accuracy &&
         a.metrics == b.metrics && a.converged == b.converged &&
         a.diverged == b.diverged && a.error == b.error;
}

std::string RunRecordToJson(const RunRecord& r) {
  json j{{"schema", kRecordSchema},
         {"config_fingerprint", r.config_fingerprint},
         {"preset", r.preset},
         {"dataset_seed", r.dataset_seed},
         {"network_seed", r.network_seed},
         {"train_loss", r.train_loss},
         {"valid_accuracy", r.valid_accuracy},
         {"metrics", MetricsToJson(r.metrics)},
         {"wall_seconds", r.wall_seconds},
         {"converged", r.converged},
         {"diverged", r.diverged},
         {"error", r.error}};
  return j.dump(2);
}

RunRecord RunRecordFromJson(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("schema").get<std::string>() != kRecordSchema) {
    throw std::invalid_argument("unsupported run record schema");
  }
  RunRecord r;
  r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  r.preset = j.at("preset").get<std::string>();
  r.dataset_seed = j.at("dataset_seed").get<uint64_t>();
  r.network_seed = j.at("network_seed").get<uint64_t>();
  r.train_loss = j.at("train_loss").get<std::vector<double>>();
  r.valid_accuracy = j.at("valid_accuracy").get<std::vector<double>>();
  r.metrics = MetricsFromJson(j.at("metrics"));
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.converged = j.at("converged").get<bool>();
  r.diverged = j.at("diverged").get<bool>();
  r.error = j.at("error").get<std::string>();
  return r;
}

void WriteRunRecord(const std::filesystem::path& path, const RunRecord& record) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write then rename so a concurrent reader never sees a partial record.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << RunRecordToJson(record) << '\n';
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunRecord ReadRunRecord(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return RunRecordFromJson(buffer.str());
}

std::vector<RunRecord> LoadRunRecords(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunRecord> records;
  for (const auto& p : paths) records.push_back(ReadRunRecord(p));
  return records;
}

TrainedRun TrainAgents(const ExperimentConfig& config, uint64_t dataset_seed,
                       uint64_t network_seed, const TrainHooks& hooks) {
  config.Validate();
  const auto started = std::chrono::steady_clock::now();
  const EnvironmentSpec spec = config.Environment();
  const AgentConfig agents = config.Agents();
  const ChannelConfig channel = config.Channel();

  TrainedRun run;
  run.data = BuildDataset(spec, config.sizes, dataset_seed);
  const RngStream net(network_seed);
  run.sender.emplace(agents, net.Split("sender"));
  run.receiver.emplace(agents, net.Split("receiver"));
  RngStream shuffle = net.Split("shuffle");
  RngStream gumbel = net.Split("gumbel");
  const SenderAgent& sender = *run.sender;
  const ReceiverAgent& receiver = *run.receiver;

  Adam sender_opt(sender.Parameters().vars(), {.lr = config.sender_lr});
  Adam receiver_opt(receiver.Parameters().vars(), {.lr = config.receiver_lr});

  RunRecord& record = run.record;
  record.config_fingerprint = config.Fingerprint();
  record.preset = PresetName(config.preset);
  record.dataset_seed = dataset_seed;
  record.network_seed = network_seed;

  const std::vector<GameInstance>& train = run.data.train;
  std::vector<size_t> order(train.size());
  std::vector<GameInstance> batch;
  batch.reserve(config.batch_size);
  for (size_t epoch = 0; epoch < config.epochs && !record.diverged; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.UniformInt(i)]);
    }
    double loss_sum = 0.0;
    for (size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const size_t end = std::min(order.size(), begin + config.batch_size);
      batch.clear();
      for (size_t i = begin; i < end; ++i) batch.push_back(train[order[i]]);
      const auto noise = SampleMessageNoise(agents, batch.size(), gumbel);
      const RoundsResult result = PlayRounds(sender, receiver, batch, spec,
                                             channel, SenderMode::kTrain, noise);
      if (!result.finite) {
        record.diverged = true;
        break;
      }
      Backward(result.loss);
      if (!sender_opt.GradientsFinite() || !receiver_opt.GradientsFinite()) {
        record.diverged = true;
        break;
      }
      sender_opt.Step();
      receiver_opt.Step();
      sender_opt.ZeroGrad();
      receiver_opt.ZeroGrad();
      loss_sum += result.loss->value().item() * static_cast<double>(batch.size());
    }
    if (record.diverged) break;
    record.train_loss.push_back(loss_sum / static_cast<double>(train.size()));
    record.valid_accuracy.push_back(
        EvaluateAccuracy(sender, receiver, run.data.valid, spec));
    if (hooks.on_epoch) {
      hooks.on_epoch(epoch, record.train_loss.back(),
                     record.valid_accuracy.back());
    }
  }

  record.metrics = ProtocolStats(sender, receiver, run.data.test, spec);
  record.converged = !record.diverged &&
                     record.metrics.accuracy >= config.convergence_threshold;
  record.metrics.converged = record.converged;
  record.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  return run;
}

RunRecord TrainRun(const ExperimentConfig& config, uint64_t dataset_seed,
                   uint64_t network_seed, const TrainHooks& hooks) {
  return TrainAgents(config, dataset_seed, network_seed, hooks).record;
}

void SaveRunCheckpoint(const std::filesystem::path& path,
                       const ExperimentConfig& config, uint64_t dataset_seed,
                       uint64_t network_seed, const SenderAgent& sender,
                       const ReceiverAgent& receiver) {
  ParameterSet params = sender.Parameters();
  params.Append(receiver.Parameters());
  SaveCheckpoint(path, HeaderJson(config, dataset_seed, network_seed), params);
}

RestoredRun LoadRunCheckpoint(const std::filesystem::path& path) {
  const CheckpointData data = LoadCheckpoint(path);
  const json header = json::parse(data.header_json);
  ExperimentConfig config;
  for (const auto& [key, value] : header.at("config").items()) {
    ApplyConfigValue(config, key, value.get<std::string>());
  }
  if (config.preset == Preset::kCustom && header.contains("probabilities")) {
    config.custom_probabilities =
        header["probabilities"].get<std::vector<std::vector<double>>>();
  }
  const uint64_t dataset_seed = header.at("dataset_seed").get<uint64_t>();
  const uint64_t network_seed = header.at("network_seed").get<uint64_t>();
  const RngStream net(network_seed);
  RestoredRun run{config, dataset_seed, network_seed,
                  SenderAgent(config.Agents(), net.Split("sender")),
                  ReceiverAgent(config.Agents(), net.Split("receiver"))};
  ParameterSet params = run.sender.Parameters();
  params.Append(run.receiver.Parameters());
  RestoreParameters(data, params);
  return run;
}

std::vector<std::string> MetricNames(size_t n_features) {
  std::vector<std::string> names = {"accuracy", "unique_messages",
                                    "message_entropy", "unique_targets",
                                    "target_entropy"};
  for (size_t f = 1; f <= n_features; ++f) {
    names.push_back("mi_feature_" + std::to_string(f));
  }
  return names;
}

std::vector<double> MetricValues(const RunMetrics& m) {
  std::vector<double> values = {m.accuracy,
                                static_cast<double>(m.unique_messages),
                                m.message_entropy,
                                static_cast<double>(m.unique_targets),
                                m.target_entropy};
  values.insert(values.end(), m.feature_mi.begin(), m.feature_mi.end());
  return values;
}

const MetricSummary& SummaryTable::Get(const std::string& metric) const {
  for (const auto& m : metrics) {
    if (m.metric == metric) return m;
  }
  throw std::out_of_range("no metric named " + metric);
}

SummaryTable Aggregate(std::span<const RunRecord> records) {
  SummaryTable table;
  table.n_runs = records.size();
  std::vector<const RunRecord*> kept;
  for (const auto& r : records) {
    if (r.converged) kept.push_back(&r);
  }
  table.n_converged = kept.size();
  if (kept.empty()) {
    throw std::invalid_argument("aggregate: none of the " +
                                std::to_string(records.size()) +
                                " runs converged");
  }
  table.preset = kept.front()->preset;
  const size_t n_features = kept.front()->metrics.feature_mi.size();
  const auto names = MetricNames(n_features);
  std::vector<std::vector<double>> columns(names.size());
  for (const RunRecord* r : kept) {
    const auto values = MetricValues(r->metrics);
    if (values.size() != names.size()) {
      throw std::invalid_argument("aggregate: records disagree on feature count");
    }
    for (size_t k = 0; k < values.size(); ++k) columns[k].push_back(values[k]);
  }
  for (size_t k = 0; k < names.size(); ++k) {
    const auto& xs = columns[k];
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    table.metrics.push_back({names[k], mean, sd});
  }
  return table;
}

void WriteSummaryCsv(const std::filesystem::path& path,
                     std::span<const SummaryTable> tables) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "preset,metric,mean,std,n_runs,n_converged\n";
  for (const auto& t : tables) {
    for (const auto& m : t.metrics) {
      out << t.preset << ',' << m.metric << ',' << FormatDouble(m.mean) << ','
          << FormatDouble(m.std) << ',' << t.n_runs << ',' << t.n_converged
          << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::filesystem::path RunRecordPath(const ExperimentConfig& config,
                                    uint64_t dataset_seed,
                                    uint64_t network_seed) {
  return config.output_dir / "runs" /
         (PresetName(config.preset) + "-" + config.Fingerprint().substr(0, 8) +
          "-d" + std::to_string(dataset_seed) + "-n" +
          std::to_string(network_seed) + ".json");
}

SweepResult RunSweep(const ExperimentConfig& config, const SweepOptions& options) {
  config.Validate();
  std::vector<std::pair<uint64_t, uint64_t>> grid;
  for (uint64_t d : config.dataset_seeds) {
    for (uint64_t n : config.network_seeds) grid.emplace_back(d, n);
  }
  SweepResult result;
  result.records.resize(grid.size());
  const std::string fingerprint = config.Fingerprint();
  std::filesystem::create_directories(config.output_dir / "runs");

  std::atomic<size_t> next{0};
  std::mutex callback_mutex;
  auto worker = [&] {
    for (size_t i = next++; i < grid.size(); i = next++) {
      const auto [d, n] = grid[i];
      const auto path = RunRecordPath(config, d, n);
      RunRecord record;
      bool loaded = false;
      if (options.resume && std::filesystem::exists(path)) {
        try {
          record = ReadRunRecord(path);
          loaded = record.config_fingerprint == fingerprint &&
                   record.dataset_seed == d && record.network_seed == n &&
                   record.error.empty();
        } catch (const std::exception&) {
          loaded = false;
        }
      }
      if (!loaded) {
        try {
          TrainedRun run = TrainAgents(config, d, n);
          record = std::move(run.record);
          if (options.save_checkpoints) {
            auto ckpt = path;
            ckpt.replace_extension(".ckpt");
            SaveRunCheckpoint(ckpt, config, d, n, *run.sender, *run.receiver);
          }
        } catch (const std::exception& e) {
          record = RunRecord{};
          record.config_fingerprint = fingerprint;
          record.preset = PresetName(config.preset);
          record.dataset_seed = d;
          record.network_seed = n;
          record.error = e.what();
        }
        WriteRunRecord(path, record);
      }
      result.records[i] = record;
      if (options.on_run) {
        std::lock_guard lock(callback_mutex);
        options.on_run(record);
      }
    }
  };
  const size_t n_threads = std::min(config.jobs, grid.size());
  std::vector<std::thread> threads;
  for (size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  if (std::any_of(result.records.begin(), result.records.end(),
                  [](const RunRecord& r) { return r.converged; })) {
    result.summary = Aggregate(result.records);
    const SummaryTable tables[] = {*result.summary};
    WriteSummaryCsv(config.output_dir / "summary.csv", tables);
  }
  return result;
}

}  // namespace emcomm
