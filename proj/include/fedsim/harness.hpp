#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedsim/data.hpp"
#include "fedsim/federation.hpp"
#include "fedsim/schedules.hpp"

namespace fedsim {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Where the training/test data comes from: generated on the fly or two CSV
// files. Synthetic data draws train and test from a single generation call
// (first n_train examples train, the rest test) so they share class means.
struct SyntheticSpec {
  int classes = 2;
  int dim = 2;
  int n_train = 0;
  int n_test = 0;
  double spread = 1.0;
  std::uint64_t seed = 0;
};

struct CsvSpec {
  std::filesystem::path train;
  std::filesystem::path test;
};

struct DataSpec {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SyntheticSpec synthetic;
  CsvSpec csv;
};

struct PartitionSpec {
  enum class Kind { kIid, kShards };
  Kind kind = Kind::kIid;
  int shards_per_client = 1;  // shards only
};

// Everything one run needs, as parsed from a single JSON document. Unknown
// keys anywhere in the document are rejected.
struct ExperimentConfig {
  FedConfig fed;
  DataSpec data;
  PartitionSpec partition;
  DataSchedule data_schedule;
  ParticipationSchedule participation;
  FimOptions fim;
  WeightingPolicy weighting = WeightingPolicy::kActiveSize;
  // Absolute test-accuracy target for rounds_to_target; when unset the
  // target is target_fraction of the run's own final accuracy.
  std::optional<double> target_accuracy;
  double target_fraction = 0.99;
  int threads = 1;  // 0 = all hardware threads
  bool measure_wall_time = false;

  void validate() const;  // throws ConfigError
};

ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Canonical snapshot with every default filled in; parsing it back yields an
// equal config. Embedded in run.json / sweep.json.
nlohmann::json config_to_json(const ExperimentConfig& config);

struct RunRecord {
  ExperimentConfig config;
  std::vector<RoundMetrics> rounds;
  double final_accuracy = 0.0;  // last round's test accuracy
  double best_accuracy = 0.0;   // max over rounds
  double target_used = 0.0;
  std::optional<int> rounds_to_target;  // nullopt: never reached
};

// Number of rounds (1-based) until test accuracy first reaches `target`.
std::optional<int> rounds_to_target(std::span<const RoundMetrics> rounds,
                                    double target);

// Runs the configured experiment for its full horizon. Deterministic in the
// config (wall_ms aside, and that is only nonzero when requested).
RunRecord run_experiment(const ExperimentConfig& config);

struct SweepRow {
  int recover_round = 0;
  int n_seeds = 0;
  double mean_final_accuracy = 0.0;
  double std_final_accuracy = 0.0;  // sample std, 0 for a single seed
  // Mean over the runs that reached their target; NaN if none did.
  double mean_rounds_to_target = 0.0;
};

struct SweepSummary {
  ExperimentConfig base_config;
  std::vector<int> recover_rounds;  // ascending
  std::vector<std::uint64_t> seeds;
  std::vector<SweepRow> rows;       // one per recover round, same order
  std::vector<RunRecord> runs;      // recover-round-major, then seed order
};

// Runs |recover_rounds| x |seeds| experiments, varying the data schedule's
// switch round and the master seed of `config`. Duplicate recover rounds are
// rejected; rows come back sorted by recover round.
SweepSummary sweep_recover_rounds(const ExperimentConfig& config,
                                  std::vector<int> recover_rounds,
                                  std::vector<std::uint64_t> seeds);

// Writes metrics.csv + run.json into out_dir (created if missing) and
// returns the paths. All files are written to a temp name then renamed.
std::vector<std::filesystem::path> emit_metrics(
    const RunRecord& record, const std::filesystem::path& out_dir);

// Writes sweep.csv + sweep.json plus per-run m<M>_seed<S>/ subdirectories.
std::vector<std::filesystem::path> emit_metrics(
    const SweepSummary& summary, const std::filesystem::path& out_dir);

}  // namespace fedsim
