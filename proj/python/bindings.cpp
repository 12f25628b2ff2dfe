// Python bindings for the simulator core. Thin: every function forwards to
// the C++ API; container conversions are pybind11's stl casters.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "fedsim/data.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/federation.hpp"
#include "fedsim/fisher.hpp"
#include "fedsim/harness.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/schedules.hpp"

namespace py = pybind11;

using namespace fedsim;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Federated-averaging simulator with Fisher-trace metrics";
  m.attr("__version__") = kLibraryVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  // ---- rng ----
  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &Rng::next_u64)
      .def("uniform01", &Rng::uniform01)
      .def("normal", &Rng::normal)
      .def("below", &Rng::below, py::arg("n"));
  m.def("stream_seed", &stream_seed, py::arg("master"), py::arg("tag"),
        py::arg("a") = 0, py::arg("b") = 0);

  // ---- tensor_nn ----
  py::class_<Example>(m, "Example")
      .def(py::init<>())
      .def(py::init([](std::vector<double> x, int y) {
             return Example{std::move(x), y};
           }),
           py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Example::x)
      .def_readwrite("y", &Example::y);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("arch", &ModelParams::arch)
      .def_readwrite("values", &ModelParams::values)
      .def_property_readonly("num_classes", &ModelParams::num_classes)
      .def_property_readonly("input_dim", &ModelParams::input_dim);

  py::class_<GradVector>(m, "GradVector")
      .def(py::init<>())
      .def_readwrite("values", &GradVector::values);

  py::class_<EvalResult>(m, "EvalResult")
      .def_readonly("accuracy", &EvalResult::accuracy)
      .def_readonly("mean_loss", &EvalResult::mean_loss);

  m.def("param_count", &param_count, py::arg("arch"));
  m.def("validate_arch", &validate_arch, py::arg("arch"));
  m.def("init_model", &init_model, py::arg("arch"), py::arg("seed"));
  m.def(
      "forward",
      [](const ModelParams& model, const std::vector<double>& x) {
        return forward(model, x);
      },
      py::arg("model"), py::arg("x"));
  m.def(
      "loss",
      [](const ModelParams& model, const std::vector<Example>& batch) {
        return loss(model, std::span<const Example>(batch));
      },
      py::arg("model"), py::arg("batch"));
  m.def(
      "grad",
      [](const ModelParams& model, const std::vector<Example>& batch) {
        return grad(model, std::span<const Example>(batch));
      },
      py::arg("model"), py::arg("batch"));
  m.def("sgd_step", &sgd_step, py::arg("model"), py::arg("grad"),
        py::arg("lr"), py::arg("weight_decay") = 0.0);
  m.def(
      "sample_label",
      [](const ModelParams& model, const std::vector<double>& x, Rng& rng) {
        return sample_label(model, x, rng);
      },
      py::arg("model"), py::arg("x"), py::arg("rng"));
  m.def(
      "evaluate",
      [](const ModelParams& model, const std::vector<Example>& dataset) {
        return evaluate(model, std::span<const Example>(dataset));
      },
      py::arg("model"), py::arg("dataset"));

  // ---- data ----
  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("examples", &Dataset::examples)
      .def_readwrite("num_classes", &Dataset::num_classes)
      .def_readwrite("dim", &Dataset::dim)
      .def("size", &Dataset::size);

  py::class_<ClientPartition>(m, "ClientPartition")
      .def(py::init<>())
      .def_readwrite("client_id", &ClientPartition::client_id)
      .def_readwrite("indices", &ClientPartition::indices)
      .def_readwrite("permuted", &ClientPartition::permuted);

  py::class_<ActiveView>(m, "ActiveView")
      // The view points into the partition; keep the partition alive.
      .def(py::init<const ClientPartition&, double>(), py::arg("partition"),
           py::arg("ratio"), py::keep_alive<1, 2>())
      .def("active_indices",
           [](const ActiveView& view) {
             const auto span = view.active_indices();
             return std::vector<int>(span.begin(), span.end());
           })
      .def_property_readonly("size", &ActiveView::size)
      .def_property_readonly("ratio", &ActiveView::ratio);

  m.def("active_count", &active_count, py::arg("ratio"), py::arg("n"));
  m.def("generate_synthetic", &generate_synthetic, py::arg("num_classes"),
        py::arg("dim"), py::arg("n"), py::arg("spread"), py::arg("seed"));
  m.def(
      "load_dataset",
      [](const std::filesystem::path& path) { return load_dataset(path); },
      py::arg("path"));
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));
  m.def("partition_iid", &partition_iid, py::arg("dataset"),
        py::arg("n_clients"), py::arg("seed"));
  m.def("partition_noniid_shards", &partition_noniid_shards,
        py::arg("dataset"), py::arg("n_clients"), py::arg("shards_per_client"),
        py::arg("seed"));
  m.def("subset_ratio", &subset_ratio, py::arg("partition"), py::arg("ratio"),
        py::keep_alive<0, 1>());  // the view points into the partition

  // ---- schedules ----
  py::class_<DataSchedule>(m, "DataSchedule")
      .def(py::init<>())
      .def(py::init([](double early_ratio, double late_ratio,
                       std::optional<int> switch_round) {
             return DataSchedule{early_ratio, late_ratio, switch_round};
           }),
           py::arg("early_ratio") = 1.0, py::arg("late_ratio") = 1.0,
           py::arg("switch_round") = std::nullopt)
      .def_static("recover", &DataSchedule::recover, py::arg("ratio"),
                  py::arg("recover_round"))
      .def_readwrite("early_ratio", &DataSchedule::early_ratio)
      .def_readwrite("late_ratio", &DataSchedule::late_ratio)
      .def_readwrite("switch_round", &DataSchedule::switch_round);
  m.def("active_ratio", &active_ratio, py::arg("schedule"), py::arg("t"));

  py::class_<ParticipationSchedule>(m, "ParticipationSchedule")
      .def(py::init<>())
      .def(py::init([](double early_fraction, double late_fraction,
                       std::optional<int> switch_round) {
             return ParticipationSchedule{early_fraction, late_fraction,
                                          switch_round};
           }),
           py::arg("early_fraction") = 1.0, py::arg("late_fraction") = 1.0,
           py::arg("switch_round") = std::nullopt)
      .def_readwrite("early_fraction", &ParticipationSchedule::early_fraction)
      .def_readwrite("late_fraction", &ParticipationSchedule::late_fraction)
      .def_readwrite("switch_round", &ParticipationSchedule::switch_round);
  m.def("participation_pool", &participation_pool, py::arg("schedule"),
        py::arg("t"), py::arg("n_clients"), py::arg("seed"));
  m.def("pool_size_at", &pool_size_at, py::arg("schedule"), py::arg("t"),
        py::arg("n_clients"));
  m.def("advise_switch_round", &advise_switch_round, py::arg("growth"),
        py::arg("fraction"));

  // ---- fisher ----
  m.def("local_fim_trace_exact", &local_fim_trace_exact, py::arg("model"),
        py::arg("dataset"), py::arg("view"));
  m.def("local_fim_trace_sampled", &local_fim_trace_sampled, py::arg("model"),
        py::arg("dataset"), py::arg("view"), py::arg("n_mc"), py::arg("rng"));
  m.def("fedfim_trace", &fedfim_trace, py::arg("local_traces"),
        py::arg("sizes"));
  m.def(
      "cum_trace",
      [](const std::vector<std::pair<double, double>>& history) {
        return cum_trace(history);
      },
      py::arg("history"));

  // ---- federation ----
  py::class_<FedConfig>(m, "FedConfig")
      .def(py::init<>())
      .def_readwrite("arch", &FedConfig::arch)
      .def_readwrite("n_clients", &FedConfig::n_clients)
      .def_readwrite("clients_per_round", &FedConfig::clients_per_round)
      .def_readwrite("local_steps", &FedConfig::local_steps)
      .def_readwrite("batch_size", &FedConfig::batch_size)
      .def_readwrite("rounds", &FedConfig::rounds)
      .def_readwrite("lr0", &FedConfig::lr0)
      .def_readwrite("lr_decay", &FedConfig::lr_decay)
      .def_readwrite("weight_decay", &FedConfig::weight_decay)
      .def_readwrite("master_seed", &FedConfig::master_seed)
      .def("validate", &FedConfig::validate);

  py::enum_<WeightingPolicy>(m, "WeightingPolicy")
      .value("ACTIVE_SIZE", WeightingPolicy::kActiveSize)
      .value("FULL_SIZE", WeightingPolicy::kFullSize);
  py::enum_<FimModelPoint>(m, "FimModelPoint")
      .value("POST_AGGREGATION", FimModelPoint::kPostAggregation)
      .value("PRE_AGGREGATION", FimModelPoint::kPreAggregation);

  py::class_<FimOptions>(m, "FimOptions")
      .def(py::init<>())
      .def_readwrite("enabled", &FimOptions::enabled)
      .def_readwrite("sampled", &FimOptions::sampled)
      .def_readwrite("mc_samples", &FimOptions::mc_samples)
      .def_readwrite("every", &FimOptions::every)
      .def_readwrite("all_clients", &FimOptions::all_clients)
      .def_readwrite("model_point", &FimOptions::model_point);

  py::class_<RoundMetrics>(m, "RoundMetrics")
      .def_readonly("round", &RoundMetrics::round)
      .def_readonly("lr", &RoundMetrics::lr)
      .def_readonly("selected", &RoundMetrics::selected)
      .def_readonly("train_loss", &RoundMetrics::train_loss)
      .def_readonly("test_accuracy", &RoundMetrics::test_accuracy)
      .def_readonly("fedfim_trace", &RoundMetrics::fedfim_trace)
      .def_readonly("cum_trace", &RoundMetrics::cum_trace)
      .def_readonly("active_ratio", &RoundMetrics::active_ratio)
      .def_readonly("pool_size", &RoundMetrics::pool_size)
      .def_readonly("wall_ms", &RoundMetrics::wall_ms);

  m.def("select_clients", &select_clients, py::arg("n_clients"), py::arg("m"),
        py::arg("rng"));
  m.def("lr_at_round", &lr_at_round, py::arg("lr0"), py::arg("decay"),
        py::arg("t"));
  m.def("local_train", &local_train, py::arg("model"), py::arg("dataset"),
        py::arg("view"), py::arg("steps"), py::arg("lr"),
        py::arg("batch_size"), py::arg("weight_decay"), py::arg("rng"));
  m.def(
      "aggregate",
      [](const std::vector<ModelParams>& models,
         const std::vector<long long>& sizes) {
        return aggregate(models, sizes);
      },
      py::arg("models"), py::arg("sizes"));

  py::class_<FedRun>(m, "FedRun")
      .def(py::init<FedConfig, DataSchedule, ParticipationSchedule,
                    std::vector<ClientPartition>, const Dataset&,
                    const Dataset&, FimOptions, WeightingPolicy, int, bool>(),
           py::arg("config"), py::arg("data_schedule"),
           py::arg("participation"), py::arg("partitions"), py::arg("train"),
           py::arg("test"), py::arg("fim") = FimOptions{},
           py::arg("weighting") = WeightingPolicy::kActiveSize,
           py::arg("n_threads") = 1, py::arg("measure_wall_time") = false,
           py::keep_alive<1, 6>(), py::keep_alive<1, 7>())
      .def("run_round", &FedRun::run_round, py::arg("t"))
      .def_property_readonly("global_model", &FedRun::global_model)
      .def_property_readonly("rounds_completed", &FedRun::rounds_completed)
      .def_property_readonly("cumulative_trace", &FedRun::cumulative_trace);

  // ---- harness ----
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static(
          "from_json",
          [](const std::string& text) {
            nlohmann::json doc;
            try {
              doc = nlohmann::json::parse(text);
            } catch (const nlohmann::json::parse_error& e) {
              throw ConfigError(std::string("invalid JSON: ") + e.what());
            }
            return parse_experiment_config(doc);
          },
          py::arg("text"))
      .def("to_json",
           [](const ExperimentConfig& c) { return config_to_json(c).dump(2); })
      .def("validate", &ExperimentConfig::validate);
  m.def("load_experiment_config", &load_experiment_config, py::arg("path"));

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("rounds", &RunRecord::rounds)
      .def_readonly("final_accuracy", &RunRecord::final_accuracy)
      .def_readonly("best_accuracy", &RunRecord::best_accuracy)
      .def_readonly("target_used", &RunRecord::target_used)
      .def_readonly("rounds_to_target", &RunRecord::rounds_to_target);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("recover_round", &SweepRow::recover_round)
      .def_readonly("n_seeds", &SweepRow::n_seeds)
      .def_readonly("mean_final_accuracy", &SweepRow::mean_final_accuracy)
      .def_readonly("std_final_accuracy", &SweepRow::std_final_accuracy)
      .def_readonly("mean_rounds_to_target", &SweepRow::mean_rounds_to_target);

  py::class_<SweepSummary>(m, "SweepSummary")
      .def_readonly("recover_rounds", &SweepSummary::recover_rounds)
      .def_readonly("seeds", &SweepSummary::seeds)
      .def_readonly("rows", &SweepSummary::rows)
      .def_readonly("runs", &SweepSummary::runs);

  m.def(
      "rounds_to_target",
      [](const std::vector<RoundMetrics>& rounds, double target) {
        return rounds_to_target(rounds, target);
      },
      py::arg("rounds"), py::arg("target"));
  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("sweep_recover_rounds", &sweep_recover_rounds, py::arg("config"),
        py::arg("recover_rounds"), py::arg("seeds"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "emit_run",
      [](const RunRecord& record, const std::filesystem::path& out_dir) {
        return emit_metrics(record, out_dir);
      },
      py::arg("record"), py::arg("out_dir"));
  m.def(
      "emit_sweep",
      [](const SweepSummary& summary, const std::filesystem::path& out_dir) {
        return emit_metrics(summary, out_dir);
      },
      py::arg("summary"), py::arg("out_dir"));
}
