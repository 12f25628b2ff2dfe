#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/schedules.hpp"

namespace fedsim {

struct FedConfig {
  std::vector<int> arch;
  int n_clients = 1;
  int clients_per_round = 1;
  int local_steps = 1;
  int batch_size = 1;
  int rounds = 1;
  double lr0 = 0.01;
  double lr_decay = 1.0;
  double weight_decay = 0.0;
  std::uint64_t master_seed = 0;

  void validate() const;  // throws ConfigError
};

// Whether aggregation (and the FedFIM weighting) uses the clients' active
// subset sizes or their full partition sizes.
enum class WeightingPolicy { kActiveSize, kFullSize };

enum class FimModelPoint { kPostAggregation, kPreAggregation };

struct FimOptions {
  bool enabled = true;
  // FimMode lives in fisher.hpp; mirrored here as a bool to keep this header
  // free of that include.
  bool sampled = false;
  int mc_samples = 64;        // per client, sampled mode only
  int every = 1;              // measure every k-th round
  bool all_clients = true;    // false: only the round's selected clients
  FimModelPoint model_point = FimModelPoint::kPostAggregation;
};

struct RoundMetrics {
  int round = 0;
  double lr = 0.0;
  std::vector<int> selected;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  double fedfim_trace = 0.0;
  double cum_trace = 0.0;
  double active_ratio = 1.0;
  int pool_size = 0;
  double wall_ms = 0.0;
};

// Uniform sample of m distinct ids from [0, n), returned sorted ascending.
std::vector<int> select_clients(int n_clients, int m, Rng& rng);

// lr0 * decay^t.
double lr_at_round(double lr0, double decay, int t);

// K mini-batch SGD steps over the view's active samples. Batches cycle a
// per-call seeded shuffle without replacement (reshuffled on wrap; the last
// batch of a cycle may be short). Within a batch the gradient reduces in
// ascending dataset-index order.
ModelParams local_train(const ModelParams& model, const Dataset& dataset,
                        const ActiveView& view, int steps, double lr,
                        int batch_size, double weight_decay, Rng& rng);

// Size-weighted average, summed in the given (ascending client id) order.
ModelParams aggregate(std::span<const ModelParams> models,
                      std::span<const long long> sizes);

// One federated run: owns the global model and the per-round loop.
// Construction wires the config to the immutable dataset and partitions;
// run_round(t) must be called with consecutive t starting at 0.
class FedRun {
 public:
  FedRun(FedConfig config, DataSchedule data_schedule,
         ParticipationSchedule participation,
         std::vector<ClientPartition> partitions, const Dataset& train,
         const Dataset& test, FimOptions fim = {},
         WeightingPolicy weighting = WeightingPolicy::kActiveSize,
         int n_threads = 1, bool measure_wall_time = false);

  RoundMetrics run_round(int t);

  const ModelParams& global_model() const { return model_; }
  const FedConfig& config() const { return config_; }
  int rounds_completed() const { return rounds_completed_; }
  double cumulative_trace() const { return cum_trace_; }

 private:
  double measure_fim(int t, const ModelParams& pre_aggregation,
                     std::span<const int> selected, double ratio);

  FedConfig config_;
  DataSchedule data_schedule_;
  ParticipationSchedule participation_;
  std::vector<ClientPartition> partitions_;
  const Dataset* train_;
  const Dataset* test_;
  FimOptions fim_;
  WeightingPolicy weighting_;
  int n_threads_;
  bool measure_wall_time_;

  ModelParams model_;
  int rounds_completed_ = 0;
  double cum_trace_ = 0.0;
  double last_fim_trace_ = 0.0;
};

}  // namespace fedsim
