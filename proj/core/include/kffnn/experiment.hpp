#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kffnn/clip.hpp"
#include "kffnn/dataset.hpp"
#include "kffnn/envelope.hpp"
#include "kffnn/metrics.hpp"
#include "kffnn/models.hpp"
#include "kffnn/train_config.hpp"

namespace kffnn {

enum class SystemKind { KFfnn, Rnn, Lstm, Blstm };

/// One row of the system table: kffnn-fn1/fn2/fn3/linear, ffnn (the constant
/// envelope), rnn, lstm, blstm.
struct SystemSpec {
  std::string name;
  SystemKind kind = SystemKind::KFfnn;
  Envelope envelope = Envelope::constant();
};

/// Throws ContractError for unknown names.
SystemSpec system_from_name(std::string_view name);
const std::vector<std::string>& known_system_names();

/// Trains one system on a training set.
AnyModel train_system(const SystemSpec& system, const Dataset& train, const TrainConfig& cfg);

/// Clip-level evaluation; the envelope of k-FFNN systems drives reconstruction.
EvalReport evaluate_system(const SystemSpec& system, const AnyModel& model, const Dataset& test);

struct ExperimentConfig {
  /// Exactly one of generate / dataset_path is used; generate wins if set.
  std::optional<GenerationMeta> generate;
  std::optional<std::filesystem::path> dataset_path;

  SplitSpec split{};
  std::vector<std::string> systems;
  std::vector<std::size_t> train_sizes;
  std::vector<std::uint64_t> seeds;
  TrainConfig train{};
  /// When nonempty every system runs once per hidden size and its name gains
  /// a "/h<H>" suffix; otherwise train.hidden is used.
  std::vector<std::size_t> hidden_sizes;
  std::filesystem::path output_dir = "results";
  /// Worker threads for independent cells; 0 = hardware concurrency.
  std::size_t threads = 1;

  /// Nonempty systems, sizes and seeds, known system names, valid TrainConfig.
  void validate() const;
};

ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Canonical JSON for the effective configuration (stable key order).
std::string to_json(const ExperimentConfig& cfg);

/// Median over seeds for one (system, train_size).
struct AggregateRow {
  std::string system;
  std::size_t train_size = 0;
  std::optional<double> median_mse;
  std::optional<double> median_pcc;
  std::size_t seeds = 0;
  std::size_t failed = 0;
};

struct SweepResult {
  /// Sorted by (system order in config, train_size, seed order in config).
  std::vector<EvalReport> rows;
  std::vector<AggregateRow> aggregate;
};

/// TrainConfig for one cell. Every system in a cell uses the same seed, so the
/// input-to-hidden and hidden-to-output layers start from identical weights.
TrainConfig cell_train_config(const ExperimentConfig& cfg, std::uint64_t seed,
                              std::size_t hidden);

/// Runs every (system, size, seed) cell. Training divergence yields a failed
/// row and the sweep continues.
SweepResult run_sweep(const ExperimentConfig& cfg, const Dataset& data);

/// Loads or generates the dataset named by the config.
Dataset materialize_dataset(const ExperimentConfig& cfg);

std::vector<AggregateRow> aggregate(const std::vector<EvalReport>& rows);

std::string results_csv(const std::vector<EvalReport>& rows);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

/// Writes results.csv, aggregate.csv and effective_config.json to output_dir.
void write_sweep_outputs(const ExperimentConfig& cfg, const SweepResult& result);

double median(std::vector<double> values);

}  // namespace kffnn
