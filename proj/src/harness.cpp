#include "fedsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

using nlohmann::json;

const json* find_key(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

void require_object(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + " must be a JSON object");
}

void reject_unknown_keys(const json& j, const std::string& ctx,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return item.key() == k; });
    if (!known) {
      throw ConfigError("unknown key '" + item.key() + "' in " + ctx);
    }
  }
}

const json& require_key(const json& j, const std::string& ctx,
                        const char* key) {
  const json* v = find_key(j, key);
  if (!v) throw ConfigError(ctx + ": missing required key '" + key + "'");
  return *v;
}

int get_int(const json& j, const std::string& ctx, const char* key) {
  const json& v = require_key(j, ctx, key);
  if (!v.is_number_integer()) {
    throw ConfigError(ctx + ": '" + std::string(key) +
                      "' must be an integer");
  }
  return v.get<int>();
}

int get_int_or(const json& j, const std::string& ctx, const char* key,
               int fallback) {
  return find_key(j, key) ? get_int(j, ctx, key) : fallback;
}

double get_double(const json& j, const std::string& ctx, const char* key) {
  const json& v = require_key(j, ctx, key);
  if (!v.is_number()) {
    throw ConfigError(ctx + ": '" + std::string(key) + "' must be a number");
  }
  return v.get<double>();
}

double get_double_or(const json& j, const std::string& ctx, const char* key,
                     double fallback) {
  return find_key(j, key) ? get_double(j, ctx, key) : fallback;
}

bool get_bool_or(const json& j, const std::string& ctx, const char* key,
                 bool fallback) {
  const json* v = find_key(j, key);
  if (!v) return fallback;
  if (!v->is_boolean()) {
    throw ConfigError(ctx + ": '" + std::string(key) + "' must be a boolean");
  }
  return v->get<bool>();
}

std::string get_string(const json& j, const std::string& ctx,
                       const char* key) {
  const json& v = require_key(j, ctx, key);
  if (!v.is_string()) {
    throw ConfigError(ctx + ": '" + std::string(key) + "' must be a string");
  }
  return v.get<std::string>();
}

std::uint64_t get_seed(const json& j, const std::string& ctx,
                       const char* key) {
  const json& v = require_key(j, ctx, key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(ctx + ": '" + std::string(key) +
                    "' must be a non-negative integer");
}

// A round index that may be absent or null (meaning "never").
std::optional<int> get_opt_round(const json& j, const std::string& ctx,
                                 const char* key) {
  const json* v = find_key(j, key);
  if (!v || v->is_null()) return std::nullopt;
  if (!v->is_number_integer()) {
    throw ConfigError(ctx + ": '" + std::string(key) +
                      "' must be an integer or null");
  }
  return v->get<int>();
}

void check_unit_interval(double v, const std::string& what) {
  if (!(v > 0.0) || v > 1.0) {
    throw ConfigError(what + " must be in (0, 1]");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  fed.validate();
  if (data.kind == DataSpec::Kind::kSynthetic) {
    const SyntheticSpec& s = data.synthetic;
    if (s.classes < 2) throw ConfigError("data: classes must be >= 2");
    if (s.dim < 1) throw ConfigError("data: dim must be >= 1");
    if (s.n_train < 1) throw ConfigError("data: n_train must be >= 1");
    if (s.n_test < 1) throw ConfigError("data: n_test must be >= 1");
    if (!(s.spread > 0.0)) throw ConfigError("data: spread must be > 0");
  } else {
    if (data.csv.train.empty() || data.csv.test.empty()) {
      throw ConfigError("data: csv requires 'train' and 'test' paths");
    }
  }
  if (partition.kind == PartitionSpec::Kind::kShards &&
      partition.shards_per_client < 1) {
    throw ConfigError("partition: shards_per_client must be >= 1");
  }
  check_unit_interval(data_schedule.early_ratio, "data_schedule: ratio");
  check_unit_interval(data_schedule.late_ratio, "data_schedule: late_ratio");
  if (data_schedule.switch_round && *data_schedule.switch_round < 0) {
    throw ConfigError("data_schedule: recover_round must be >= 0");
  }
  check_unit_interval(participation.early_fraction,
                      "participation: early_fraction");
  check_unit_interval(participation.late_fraction,
                      "participation: late_fraction");
  if (participation.switch_round && *participation.switch_round < 0) {
    throw ConfigError("participation: switch_round must be >= 0");
  }
  if (fim.every < 1) throw ConfigError("fim: every must be >= 1");
  if (fim.sampled && fim.mc_samples < 1) {
    throw ConfigError("fim: mc_samples must be >= 1 in sampled mode");
  }
  if (target_accuracy) {
    check_unit_interval(*target_accuracy, "target_accuracy");
  }
  check_unit_interval(target_fraction, "target_fraction");
  if (threads < 0) throw ConfigError("threads must be >= 0 (0 = all cores)");
}

ExperimentConfig parse_experiment_config(const json& doc) {
  require_object(doc, "config");
  reject_unknown_keys(
      doc, "config",
      {"arch", "n_clients", "clients_per_round", "local_steps", "batch_size",
       "rounds", "lr0", "lr_decay", "weight_decay", "master_seed", "data",
       "partition", "data_schedule", "participation", "fim", "weighting",
       "target_accuracy", "target_fraction", "threads", "measure_wall_time"});

  ExperimentConfig c;

  const json& arch = require_key(doc, "config", "arch");
  if (!arch.is_array() || arch.empty()) {
    throw ConfigError("config: 'arch' must be a nonempty array");
  }
  for (const json& w : arch) {
    if (!w.is_number_integer()) {
      throw ConfigError("config: 'arch' entries must be integers");
    }
    c.fed.arch.push_back(w.get<int>());
  }
  c.fed.n_clients = get_int(doc, "config", "n_clients");
  c.fed.clients_per_round = get_int(doc, "config", "clients_per_round");
  c.fed.local_steps = get_int(doc, "config", "local_steps");
  c.fed.batch_size = get_int(doc, "config", "batch_size");
  c.fed.rounds = get_int(doc, "config", "rounds");
  c.fed.lr0 = get_double(doc, "config", "lr0");
  c.fed.lr_decay = get_double_or(doc, "config", "lr_decay", 1.0);
  c.fed.weight_decay = get_double_or(doc, "config", "weight_decay", 0.0);
  c.fed.master_seed = get_seed(doc, "config", "master_seed");

  const json& data = require_key(doc, "config", "data");
  require_object(data, "data");
  const std::string data_kind = get_string(data, "data", "kind");
  if (data_kind == "synthetic") {
    reject_unknown_keys(data, "data", {"kind", "classes", "dim", "n_train",
                                       "n_test", "spread", "seed"});
    c.data.kind = DataSpec::Kind::kSynthetic;
    c.data.synthetic.classes = get_int(data, "data", "classes");
    c.data.synthetic.dim = get_int(data, "data", "dim");
    c.data.synthetic.n_train = get_int(data, "data", "n_train");
    c.data.synthetic.n_test = get_int(data, "data", "n_test");
    c.data.synthetic.spread = get_double(data, "data", "spread");
    c.data.synthetic.seed = get_seed(data, "data", "seed");
  } else if (data_kind == "csv") {
    reject_unknown_keys(data, "data", {"kind", "train", "test"});
    c.data.kind = DataSpec::Kind::kCsv;
    c.data.csv.train = get_string(data, "data", "train");
    c.data.csv.test = get_string(data, "data", "test");
  } else {
    throw ConfigError("data: 'kind' must be \"synthetic\" or \"csv\"");
  }

  if (const json* p = find_key(doc, "partition")) {
    require_object(*p, "partition");
    const std::string kind = get_string(*p, "partition", "kind");
    if (kind == "iid") {
      reject_unknown_keys(*p, "partition", {"kind"});
      c.partition.kind = PartitionSpec::Kind::kIid;
    } else if (kind == "shards") {
      reject_unknown_keys(*p, "partition", {"kind", "shards_per_client"});
      c.partition.kind = PartitionSpec::Kind::kShards;
      c.partition.shards_per_client =
          get_int(*p, "partition", "shards_per_client");
    } else {
      throw ConfigError("partition: 'kind' must be \"iid\" or \"shards\"");
    }
  }

  if (const json* s = find_key(doc, "data_schedule")) {
    require_object(*s, "data_schedule");
    reject_unknown_keys(*s, "data_schedule",
                        {"ratio", "late_ratio", "recover_round"});
    c.data_schedule.early_ratio =
        get_double_or(*s, "data_schedule", "ratio", 1.0);
    c.data_schedule.late_ratio =
        get_double_or(*s, "data_schedule", "late_ratio", 1.0);
    c.data_schedule.switch_round =
        get_opt_round(*s, "data_schedule", "recover_round");
  }

  if (const json* p = find_key(doc, "participation")) {
    require_object(*p, "participation");
    reject_unknown_keys(*p, "participation",
                        {"early_fraction", "late_fraction", "switch_round"});
    c.participation.early_fraction =
        get_double_or(*p, "participation", "early_fraction", 1.0);
    c.participation.late_fraction =
        get_double_or(*p, "participation", "late_fraction", 1.0);
    c.participation.switch_round =
        get_opt_round(*p, "participation", "switch_round");
  }

  if (const json* f = find_key(doc, "fim")) {
    require_object(*f, "fim");
    reject_unknown_keys(*f, "fim", {"enabled", "mode", "mc_samples", "every",
                                    "clients", "model_point"});
    c.fim.enabled = get_bool_or(*f, "fim", "enabled", true);
    if (find_key(*f, "mode")) {
      const std::string mode = get_string(*f, "fim", "mode");
      if (mode == "exact") {
        c.fim.sampled = false;
      } else if (mode == "sampled") {
        c.fim.sampled = true;
      } else {
        throw ConfigError("fim: 'mode' must be \"exact\" or \"sampled\"");
      }
    }
    c.fim.mc_samples = get_int_or(*f, "fim", "mc_samples", c.fim.mc_samples);
    c.fim.every = get_int_or(*f, "fim", "every", 1);
    if (find_key(*f, "clients")) {
      const std::string clients = get_string(*f, "fim", "clients");
      if (clients == "all") {
        c.fim.all_clients = true;
      } else if (clients == "selected") {
        c.fim.all_clients = false;
      } else {
        throw ConfigError("fim: 'clients' must be \"all\" or \"selected\"");
      }
    }
    if (find_key(*f, "model_point")) {
      const std::string point = get_string(*f, "fim", "model_point");
      if (point == "post_aggregation") {
        c.fim.model_point = FimModelPoint::kPostAggregation;
      } else if (point == "pre_aggregation") {
        c.fim.model_point = FimModelPoint::kPreAggregation;
      } else {
        throw ConfigError(
            "fim: 'model_point' must be \"post_aggregation\" or "
            "\"pre_aggregation\"");
      }
    }
  }

  if (find_key(doc, "weighting")) {
    const std::string w = get_string(doc, "config", "weighting");
    if (w == "active") {
      c.weighting = WeightingPolicy::kActiveSize;
    } else if (w == "full") {
      c.weighting = WeightingPolicy::kFullSize;
    } else {
      throw ConfigError("config: 'weighting' must be \"active\" or \"full\"");
    }
  }

  if (const json* t = find_key(doc, "target_accuracy")) {
    if (!t->is_null()) {
      c.target_accuracy = get_double(doc, "config", "target_accuracy");
    }
  }
  c.target_fraction = get_double_or(doc, "config", "target_fraction", 0.99);
  c.threads = get_int_or(doc, "config", "threads", 1);
  c.measure_wall_time =
      get_bool_or(doc, "config", "measure_wall_time", false);

  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(file);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_experiment_config(doc);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["arch"] = c.fed.arch;
  j["n_clients"] = c.fed.n_clients;
  j["clients_per_round"] = c.fed.clients_per_round;
  j["local_steps"] = c.fed.local_steps;
  j["batch_size"] = c.fed.batch_size;
  j["rounds"] = c.fed.rounds;
  j["lr0"] = c.fed.lr0;
  j["lr_decay"] = c.fed.lr_decay;
  j["weight_decay"] = c.fed.weight_decay;
  j["master_seed"] = c.fed.master_seed;

  if (c.data.kind == DataSpec::Kind::kSynthetic) {
    j["data"] = {{"kind", "synthetic"},
                 {"classes", c.data.synthetic.classes},
                 {"dim", c.data.synthetic.dim},
                 {"n_train", c.data.synthetic.n_train},
                 {"n_test", c.data.synthetic.n_test},
                 {"spread", c.data.synthetic.spread},
                 {"seed", c.data.synthetic.seed}};
  } else {
    j["data"] = {{"kind", "csv"},
                 {"train", c.data.csv.train.string()},
                 {"test", c.data.csv.test.string()}};
  }

  if (c.partition.kind == PartitionSpec::Kind::kIid) {
    j["partition"] = {{"kind", "iid"}};
  } else {
    j["partition"] = {{"kind", "shards"},
                      {"shards_per_client", c.partition.shards_per_client}};
  }

  j["data_schedule"] = {
      {"ratio", c.data_schedule.early_ratio},
      {"late_ratio", c.data_schedule.late_ratio},
      {"recover_round", c.data_schedule.switch_round
                            ? json(*c.data_schedule.switch_round)
                            : json(nullptr)}};
  j["participation"] = {
      {"early_fraction", c.participation.early_fraction},
      {"late_fraction", c.participation.late_fraction},
      {"switch_round", c.participation.switch_round
                           ? json(*c.participation.switch_round)
                           : json(nullptr)}};
  j["fim"] = {{"enabled", c.fim.enabled},
              {"mode", c.fim.sampled ? "sampled" : "exact"},
              {"mc_samples", c.fim.mc_samples},
              {"every", c.fim.every},
              {"clients", c.fim.all_clients ? "all" : "selected"},
              {"model_point",
               c.fim.model_point == FimModelPoint::kPostAggregation
                   ? "post_aggregation"
                   : "pre_aggregation"}};
  j["weighting"] =
      c.weighting == WeightingPolicy::kActiveSize ? "active" : "full";
  j["target_accuracy"] =
      c.target_accuracy ? json(*c.target_accuracy) : json(nullptr);
  j["target_fraction"] = c.target_fraction;
  j["threads"] = c.threads;
  j["measure_wall_time"] = c.measure_wall_time;
  return j;
}

std::optional<int> rounds_to_target(std::span<const RoundMetrics> rounds,
                                    double target) {
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    if (rounds[t].test_accuracy >= target) return static_cast<int>(t) + 1;
  }
  return std::nullopt;
}

RunRecord run_experiment(const ExperimentConfig& config) {
  config.validate();

  Dataset train;
  Dataset test;
  if (config.data.kind == DataSpec::Kind::kSynthetic) {
    const SyntheticSpec& s = config.data.synthetic;
    Dataset all = generate_synthetic(s.classes, s.dim, s.n_train + s.n_test,
                                     s.spread, s.seed);
    train.num_classes = test.num_classes = all.num_classes;
    train.dim = test.dim = all.dim;
    train.examples.assign(all.examples.begin(),
                          all.examples.begin() + s.n_train);
    test.examples.assign(all.examples.begin() + s.n_train,
                         all.examples.end());
  } else {
    train = load_dataset(config.data.csv.train);
    test = load_dataset(config.data.csv.test);
    if (test.dim != train.dim) {
      throw DataError("train dim " + std::to_string(train.dim) +
                      " does not match test dim " + std::to_string(test.dim));
    }
    // Align the class counts so a label seen only on one side still fits.
    const int classes = std::max(train.num_classes, test.num_classes);
    train.num_classes = test.num_classes = classes;
  }

  std::vector<ClientPartition> partitions =
      config.partition.kind == PartitionSpec::Kind::kIid
          ? partition_iid(train, config.fed.n_clients, config.fed.master_seed)
          : partition_noniid_shards(train, config.fed.n_clients,
                                    config.partition.shards_per_client,
                                    config.fed.master_seed);

  FedRun run(config.fed, config.data_schedule, config.participation,
             std::move(partitions), train, test, config.fim, config.weighting,
             config.threads, config.measure_wall_time);

  RunRecord record;
  record.config = config;
  record.rounds.reserve(static_cast<std::size_t>(config.fed.rounds));
  for (int t = 0; t < config.fed.rounds; ++t) {
    record.rounds.push_back(run.run_round(t));
  }

  record.final_accuracy = record.rounds.back().test_accuracy;
  record.best_accuracy = 0.0;
  for (const RoundMetrics& m : record.rounds) {
    record.best_accuracy = std::max(record.best_accuracy, m.test_accuracy);
  }
  record.target_used = config.target_accuracy
                           ? *config.target_accuracy
                           : config.target_fraction * record.final_accuracy;
  record.rounds_to_target = rounds_to_target(record.rounds, record.target_used);
  return record;
}

SweepSummary sweep_recover_rounds(const ExperimentConfig& config,
                                  std::vector<int> recover_rounds,
                                  std::vector<std::uint64_t> seeds) {
  if (recover_rounds.empty()) {
    throw ConfigError("sweep: recover_rounds must be nonempty");
  }
  if (seeds.empty()) throw ConfigError("sweep: seeds must be nonempty");
  for (const int m : recover_rounds) {
    if (m < 0) throw ConfigError("sweep: recover rounds must be >= 0");
  }
  std::sort(recover_rounds.begin(), recover_rounds.end());
  if (std::adjacent_find(recover_rounds.begin(), recover_rounds.end()) !=
      recover_rounds.end()) {
    throw ConfigError("sweep: duplicate recover round");
  }
  {
    std::vector<std::uint64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("sweep: duplicate seed");
    }
  }

  SweepSummary summary;
  summary.base_config = config;
  summary.recover_rounds = recover_rounds;
  summary.seeds = seeds;

  for (const int m : recover_rounds) {
    std::vector<double> finals;
    std::vector<double> reached;
    for (const std::uint64_t seed : seeds) {
      ExperimentConfig point = config;
      point.data_schedule.switch_round = m;
      point.fed.master_seed = seed;
      RunRecord record = run_experiment(point);
      finals.push_back(record.final_accuracy);
      if (record.rounds_to_target) {
        reached.push_back(static_cast<double>(*record.rounds_to_target));
      }
      summary.runs.push_back(std::move(record));
    }

    SweepRow row;
    row.recover_round = m;
    row.n_seeds = static_cast<int>(seeds.size());
    double sum = 0.0;
    for (const double f : finals) sum += f;
    row.mean_final_accuracy = sum / static_cast<double>(finals.size());
    if (finals.size() > 1) {
      double ss = 0.0;
      for (const double f : finals) {
        const double d = f - row.mean_final_accuracy;
        ss += d * d;
      }
      row.std_final_accuracy =
          std::sqrt(ss / static_cast<double>(finals.size() - 1));
    }
    if (reached.empty()) {
      row.mean_rounds_to_target = std::numeric_limits<double>::quiet_NaN();
    } else {
      double rsum = 0.0;
      for (const double r : reached) rsum += r;
      row.mean_rounds_to_target = rsum / static_cast<double>(reached.size());
    }
    summary.rows.push_back(row);
  }
  return summary;
}

namespace {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary);
    if (!file) throw IoError("cannot write to " + tmp.string());
    file << content;
    file.flush();
    if (!file) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() +
                  ": " + ec.message());
  }
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + dir.string() + ": " +
                  ec.message());
  }
}

std::string metrics_csv(const std::vector<RoundMetrics>& rounds) {
  std::string out =
      "round,lr,train_loss,test_accuracy,fedfim_trace,cum_trace,"
      "active_ratio,pool_size,n_selected,wall_ms\n";
  for (const RoundMetrics& m : rounds) {
    out += std::to_string(m.round);
    out += ',' + format_g17(m.lr);
    out += ',' + format_g17(m.train_loss);
    out += ',' + format_g17(m.test_accuracy);
    out += ',' + format_g17(m.fedfim_trace);
    out += ',' + format_g17(m.cum_trace);
    out += ',' + format_g17(m.active_ratio);
    out += ',' + std::to_string(m.pool_size);
    out += ',' + std::to_string(m.selected.size());
    out += ',' + format_g17(m.wall_ms);
    out += '\n';
  }
  return out;
}

json run_json(const RunRecord& record) {
  json j;
  j["config"] = config_to_json(record.config);
  j["seed"] = record.config.fed.master_seed;
  j["final_accuracy"] = record.final_accuracy;
  j["best_accuracy"] = record.best_accuracy;
  j["target_accuracy"] = record.target_used;
  j["rounds_to_target"] = record.rounds_to_target
                              ? json(*record.rounds_to_target)
                              : json("not reached");
  j["version"] = kLibraryVersion;
  return j;
}

}  // namespace

std::vector<std::filesystem::path> emit_metrics(
    const RunRecord& record, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const std::filesystem::path csv_path = out_dir / "metrics.csv";
  const std::filesystem::path json_path = out_dir / "run.json";
  write_file_atomic(csv_path, metrics_csv(record.rounds));
  write_file_atomic(json_path, run_json(record).dump(2) + "\n");
  return {csv_path, json_path};
}

std::vector<std::filesystem::path> emit_metrics(
    const SweepSummary& summary, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  std::vector<std::filesystem::path> written;

  for (const RunRecord& record : summary.runs) {
    const int m = record.config.data_schedule.switch_round.value_or(-1);
    const std::string name = "m" + std::to_string(m) + "_seed" +
                             std::to_string(record.config.fed.master_seed);
    const std::vector<std::filesystem::path> paths =
        emit_metrics(record, out_dir / name);
    written.insert(written.end(), paths.begin(), paths.end());
  }

  std::string csv =
      "recover_round,n_seeds,mean_final_accuracy,std_final_accuracy,"
      "mean_rounds_to_target\n";
  json rows = json::array();
  for (const SweepRow& row : summary.rows) {
    csv += std::to_string(row.recover_round);
    csv += ',' + std::to_string(row.n_seeds);
    csv += ',' + format_g17(row.mean_final_accuracy);
    csv += ',' + format_g17(row.std_final_accuracy);
    csv += ',' + format_g17(row.mean_rounds_to_target);
    csv += '\n';
    json r;
    r["recover_round"] = row.recover_round;
    r["n_seeds"] = row.n_seeds;
    r["mean_final_accuracy"] = row.mean_final_accuracy;
    r["std_final_accuracy"] = row.std_final_accuracy;
    if (std::isnan(row.mean_rounds_to_target)) {
      r["mean_rounds_to_target"] = json("not reached");
    } else {
      r["mean_rounds_to_target"] = row.mean_rounds_to_target;
    }
    rows.push_back(r);
  }

  json j;
  j["config"] = config_to_json(summary.base_config);
  j["recover_rounds"] = summary.recover_rounds;
  json seeds = json::array();
  for (const std::uint64_t s : summary.seeds) seeds.push_back(s);
  j["seeds"] = seeds;
  j["rows"] = rows;
  j["version"] = kLibraryVersion;

  const std::filesystem::path csv_path = out_dir / "sweep.csv";
  const std::filesystem::path json_path = out_dir / "sweep.json";
  write_file_atomic(csv_path, csv);
  write_file_atomic(json_path, j.dump(2) + "\n");
  written.push_back(csv_path);
  written.push_back(json_path);
  return written;
}

}  // namespace fedsim
