#include "fedsim/federation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>

#include "fedsim/errors.hpp"
#include "fedsim/fisher.hpp"
#include "fedsim/parallel.hpp"
#include "nn_internal.hpp"

namespace fedsim {

void FedConfig::validate() const {
  validate_arch(arch);
  if (n_clients < 1) throw ConfigError("n_clients must be >= 1");
  if (clients_per_round < 1) {
    throw ConfigError("clients_per_round must be >= 1");
  }
  if (clients_per_round > n_clients) {
    throw ConfigError("clients_per_round " + std::to_string(clients_per_round) +
                      " exceeds n_clients " + std::to_string(n_clients));
  }
  if (local_steps < 1) throw ConfigError("local_steps must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (!(lr0 > 0.0)) throw ConfigError("lr0 must be > 0");
  if (!(lr_decay > 0.0) || lr_decay > 1.0) {
    throw ConfigError("lr_decay must be in (0, 1]");
  }
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
}

std::vector<int> select_clients(int n_clients, int m, Rng& rng) {
  if (n_clients < 1) throw ConfigError("select_clients: n_clients must be >= 1");
  if (m < 1 || m > n_clients) {
    throw ConfigError("select_clients: m must be in [1, " +
                      std::to_string(n_clients) + "], got " +
                      std::to_string(m));
  }
  // Partial Fisher-Yates: after m swaps the prefix is a uniform m-subset.
  std::vector<int> ids(static_cast<std::size_t>(n_clients));
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = 0; i < m; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) +
        static_cast<std::size_t>(rng.below(
            static_cast<std::uint64_t>(n_clients - i)));
    std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
  }
  ids.resize(static_cast<std::size_t>(m));
  std::sort(ids.begin(), ids.end());
  return ids;
}

double lr_at_round(double lr0, double decay, int t) {
  if (t < 0) throw InputError("lr_at_round: round must be >= 0");
  if (!(lr0 > 0.0)) throw ConfigError("lr_at_round: lr0 must be > 0");
  if (!(decay > 0.0) || decay > 1.0) {
    throw ConfigError("lr_at_round: decay must be in (0, 1]");
  }
  return lr0 * std::pow(decay, t);
}

ModelParams local_train(const ModelParams& model, const Dataset& dataset,
                        const ActiveView& view, int steps, double lr,
                        int batch_size, double weight_decay, Rng& rng) {
  if (steps < 1) throw ConfigError("local_train: steps must be >= 1");
  if (batch_size < 1) throw ConfigError("local_train: batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("local_train: learning rate must be > 0");
  if (weight_decay < 0.0) {
    throw ConfigError("local_train: weight decay must be >= 0");
  }
  if (model.input_dim() != dataset.dim) {
    throw InputError("local_train: model input width " +
                     std::to_string(model.input_dim()) +
                     " does not match dataset dim " +
                     std::to_string(dataset.dim));
  }

  const std::span<const int> active = view.active_indices();
  std::vector<int> order(active.begin(), active.end());
  const std::size_t n = order.size();

  ModelParams current = model;
  std::vector<int> batch;
  std::size_t pos = 0;
  for (int step = 0; step < steps; ++step) {
    if (pos == 0) rng.shuffle(order);
    const std::size_t take =
        std::min(static_cast<std::size_t>(batch_size), n - pos);
    // Sort a copy so the gradient reduces in ascending dataset-index order
    // while the epoch's shuffled order stays intact for later batches.
    batch.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                 order.begin() + static_cast<std::ptrdiff_t>(pos + take));
    std::sort(batch.begin(), batch.end());
    const GradVector g = grad(current, dataset.examples, batch);
    detail::apply_sgd(current.values, g.values, lr, weight_decay);
    pos += take;
    if (pos >= n) pos = 0;
  }
  return current;
}

ModelParams aggregate(std::span<const ModelParams> models,
                      std::span<const long long> sizes) {
  if (models.empty()) throw InputError("aggregate: no models");
  if (sizes.size() != models.size()) {
    throw InputError("aggregate: got " + std::to_string(models.size()) +
                     " models but " + std::to_string(sizes.size()) +
                     " weights");
  }
  for (const long long s : sizes) {
    if (s < 1) throw InputError("aggregate: weights must be >= 1");
  }
  for (std::size_t j = 1; j < models.size(); ++j) {
    if (models[j].arch != models[0].arch ||
        models[j].values.size() != models[0].values.size()) {
      throw InputError("aggregate: model shapes differ");
    }
  }
  // A single model averages to itself exactly; skip the divide so the m=1
  // round is bit-identical to its local result.
  if (models.size() == 1) return models[0];

  double total = 0.0;
  for (const long long s : sizes) total += static_cast<double>(s);
  ModelParams out;
  out.arch = models[0].arch;
  out.values.assign(models[0].values.size(), 0.0);
  for (std::size_t j = 0; j < models.size(); ++j) {
    const double w = static_cast<double>(sizes[j]);
    const std::vector<double>& v = models[j].values;
    for (std::size_t c = 0; c < v.size(); ++c) out.values[c] += w * v[c];
  }
  for (double& c : out.values) c /= total;
  return out;
}

namespace {

void validate_data_schedule(const DataSchedule& s) {
  if (!(s.early_ratio > 0.0) || s.early_ratio > 1.0) {
    throw ConfigError("data schedule: early_ratio must be in (0, 1]");
  }
  if (!(s.late_ratio > 0.0) || s.late_ratio > 1.0) {
    throw ConfigError("data schedule: late_ratio must be in (0, 1]");
  }
  if (s.switch_round && *s.switch_round < 0) {
    throw ConfigError("data schedule: switch_round must be >= 0");
  }
}

void validate_participation(const ParticipationSchedule& s) {
  if (!(s.early_fraction > 0.0) || s.early_fraction > 1.0) {
    throw ConfigError("participation: early_fraction must be in (0, 1]");
  }
  if (!(s.late_fraction > 0.0) || s.late_fraction > 1.0) {
    throw ConfigError("participation: late_fraction must be in (0, 1]");
  }
  if (s.switch_round && *s.switch_round < 0) {
    throw ConfigError("participation: switch_round must be >= 0");
  }
}

}  // namespace

FedRun::FedRun(FedConfig config, DataSchedule data_schedule,
               ParticipationSchedule participation,
               std::vector<ClientPartition> partitions, const Dataset& train,
               const Dataset& test, FimOptions fim, WeightingPolicy weighting,
               int n_threads, bool measure_wall_time)
    : config_(std::move(config)),
      data_schedule_(data_schedule),
      participation_(participation),
      partitions_(std::move(partitions)),
      train_(&train),
      test_(&test),
      fim_(fim),
      weighting_(weighting),
      n_threads_(n_threads),
      measure_wall_time_(measure_wall_time) {
  config_.validate();
  validate_data_schedule(data_schedule_);
  validate_participation(participation_);
  if (fim_.every < 1) throw ConfigError("fim: every must be >= 1");
  if (fim_.sampled && fim_.mc_samples < 1) {
    throw ConfigError("fim: mc_samples must be >= 1 in sampled mode");
  }

  if (train_->size() < 1) throw InputError("training dataset is empty");
  if (test_->size() < 1) throw InputError("test dataset is empty");
  if (test_->dim != train_->dim) {
    throw InputError("train/test feature dims differ");
  }
  if (config_.arch.front() != train_->dim) {
    throw InputError("model input width " +
                     std::to_string(config_.arch.front()) +
                     " does not match dataset dim " +
                     std::to_string(train_->dim));
  }
  if (config_.arch.back() < train_->num_classes ||
      config_.arch.back() < test_->num_classes) {
    throw InputError("model has fewer output classes than the data");
  }

  if (static_cast<int>(partitions_.size()) != config_.n_clients) {
    throw ConfigError("expected " + std::to_string(config_.n_clients) +
                      " partitions, got " +
                      std::to_string(partitions_.size()));
  }
  for (std::size_t i = 0; i < partitions_.size(); ++i) {
    const ClientPartition& p = partitions_[i];
    if (p.client_id != static_cast<int>(i)) {
      throw ConfigError("partitions must be ordered by client id");
    }
    if (p.indices.empty()) {
      throw ConfigError("client " + std::to_string(i) + " has no data");
    }
    if (p.permuted.size() != p.indices.size()) {
      throw ConfigError("client " + std::to_string(i) +
                        " permutation size mismatch");
    }
    for (const int idx : p.indices) {
      if (idx < 0 || idx >= train_->size()) {
        throw ConfigError("client " + std::to_string(i) +
                          " references sample " + std::to_string(idx) +
                          " outside the training set");
      }
    }
  }

  // The pool must cover the per-round selection in both phases.
  const int early_pool = pool_size_at(participation_, 0, config_.n_clients);
  int min_pool = early_pool;
  if (participation_.switch_round) {
    min_pool = std::min(
        min_pool, pool_size_at(participation_, *participation_.switch_round,
                               config_.n_clients));
  }
  if (min_pool < config_.clients_per_round) {
    throw ConfigError("participation pool (" + std::to_string(min_pool) +
                      " clients) is smaller than clients_per_round (" +
                      std::to_string(config_.clients_per_round) + ")");
  }

  model_ = init_model(config_.arch, config_.master_seed);
}

RoundMetrics FedRun::run_round(int t) {
  if (t != rounds_completed_) {
    throw InputError("rounds must run consecutively; expected round " +
                     std::to_string(rounds_completed_) + ", got " +
                     std::to_string(t));
  }
  if (t >= config_.rounds) {
    throw InputError("round " + std::to_string(t) +
                     " is past the configured horizon of " +
                     std::to_string(config_.rounds));
  }
  const auto started = std::chrono::steady_clock::now();

  const double lr = lr_at_round(config_.lr0, config_.lr_decay, t);
  const double ratio = active_ratio(data_schedule_, t);
  const std::vector<int> pool =
      participation_pool(participation_, t, config_.n_clients,
                         config_.master_seed);
  if (static_cast<int>(pool.size()) < config_.clients_per_round) {
    throw ConfigError("participation pool is smaller than clients_per_round");
  }

  // Sample positions within the (sorted) pool; ascending positions of an
  // ascending pool keep the selected ids ascending.
  Rng selection_rng(stream_seed(config_.master_seed, streams::kSelection,
                                static_cast<std::uint64_t>(t)));
  const std::vector<int> positions =
      select_clients(static_cast<int>(pool.size()), config_.clients_per_round,
                     selection_rng);
  std::vector<int> selected(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    selected[i] = pool[static_cast<std::size_t>(positions[i])];
  }

  // Local training, one slot per selected client. Each client draws from its
  // own seeded stream, so the result is independent of worker scheduling.
  const std::size_t m = selected.size();
  std::vector<ModelParams> locals(m);
  std::vector<long long> sizes(m);
  parallel_for(m, n_threads_, [&](std::size_t k) {
    const ClientPartition& part = partitions_[static_cast<std::size_t>(
        selected[k])];
    const ActiveView view = subset_ratio(part, ratio);
    Rng rng(stream_seed(config_.master_seed, streams::kLocalTrain,
                        static_cast<std::uint64_t>(t),
                        static_cast<std::uint64_t>(selected[k])));
    locals[k] = local_train(model_, *train_, view, config_.local_steps, lr,
                            config_.batch_size, config_.weight_decay, rng);
    sizes[k] = weighting_ == WeightingPolicy::kActiveSize
                   ? view.size()
                   : static_cast<long long>(part.indices.size());
  });

  ModelParams pre_aggregation = std::move(model_);
  model_ = aggregate(locals, sizes);

  // Train loss over every client's active data at this round's ratio: the
  // loss the objective actually weights, not just the selected clients'.
  std::vector<int> train_indices;
  for (const ClientPartition& part : partitions_) {
    const ActiveView view = subset_ratio(part, ratio);
    const std::span<const int> active = view.active_indices();
    train_indices.insert(train_indices.end(), active.begin(), active.end());
  }
  std::sort(train_indices.begin(), train_indices.end());
  const double train_loss = loss(model_, train_->examples, train_indices);
  const EvalResult test_eval =
      evaluate(model_, std::span<const Example>(test_->examples));

  const double fed_trace = measure_fim(t, pre_aggregation, selected, ratio);
  cum_trace_ += lr * fed_trace;
  ++rounds_completed_;

  RoundMetrics metrics;
  metrics.round = t;
  metrics.lr = lr;
  metrics.selected = selected;
  metrics.train_loss = train_loss;
  metrics.test_accuracy = test_eval.accuracy;
  metrics.fedfim_trace = fed_trace;
  metrics.cum_trace = cum_trace_;
  metrics.active_ratio = ratio;
  metrics.pool_size = static_cast<int>(pool.size());
  if (measure_wall_time_) {
    metrics.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  }
  return metrics;
}

double FedRun::measure_fim(int t, const ModelParams& pre_aggregation,
                           std::span<const int> selected, double ratio) {
  if (!fim_.enabled) return 0.0;
  // Between measurement rounds the last value is held, so the cumulative
  // trace still accumulates every round's lr against a defined trace.
  if (t % fim_.every != 0) return last_fim_trace_;

  const ModelParams& at = fim_.model_point == FimModelPoint::kPreAggregation
                              ? pre_aggregation
                              : model_;
  std::vector<int> clients;
  if (fim_.all_clients) {
    clients.resize(static_cast<std::size_t>(config_.n_clients));
    std::iota(clients.begin(), clients.end(), 0);
  } else {
    clients.assign(selected.begin(), selected.end());
  }

  std::vector<double> traces(clients.size());
  std::vector<long long> sizes(clients.size());
  parallel_for(clients.size(), n_threads_, [&](std::size_t k) {
    const ClientPartition& part =
        partitions_[static_cast<std::size_t>(clients[k])];
    const ActiveView view = subset_ratio(part, ratio);
    if (fim_.sampled) {
      Rng rng(stream_seed(config_.master_seed, streams::kFim,
                          static_cast<std::uint64_t>(t),
                          static_cast<std::uint64_t>(clients[k])));
      traces[k] =
          local_fim_trace_sampled(at, *train_, view, fim_.mc_samples, rng);
    } else {
      traces[k] = local_fim_trace_exact(at, *train_, view);
    }
    sizes[k] = weighting_ == WeightingPolicy::kActiveSize
                   ? view.size()
                   : static_cast<long long>(part.indices.size());
  });

  std::map<int, double> trace_by_client;
  std::map<int, long long> size_by_client;
  for (std::size_t k = 0; k < clients.size(); ++k) {
    trace_by_client[clients[k]] = traces[k];
    size_by_client[clients[k]] = sizes[k];
  }
  last_fim_trace_ = fedfim_trace(trace_by_client, size_by_client);
  return last_fim_trace_;
}

}  // namespace fedsim
