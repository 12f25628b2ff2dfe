#pragma once

#include <map>
#include <span>
#include <utility>

#include "fedsim/data.hpp"
#include "fedsim/nn.hpp"

namespace fedsim {

enum class FimMode { kExact, kSampled };

// One round's Fisher-trace measurement.
struct FimEstimate {
  int round = 0;
  std::map<int, double> local_traces;  // client id -> Tr(F_j)
  double fedfim_trace = 0.0;
  FimMode mode = FimMode::kExact;
  int samples_used = 0;
};

// Trace of the local Fisher information of `model` on a client's active data:
// E_x E_{y ~ p_w(.|x)} ||g(x, y; w)||^2 with per-example gradients.
//
// Exact mode evaluates the inner expectation over all classes in closed form;
// sampled mode averages n_mc draws of (x uniform over the active set, y from
// the predictive distribution). The rng is only consumed in sampled mode.
double local_fim_trace(const ModelParams& model, const Dataset& dataset,
                       const ActiveView& view, FimMode mode, int n_mc,
                       Rng* rng);

double local_fim_trace_exact(const ModelParams& model, const Dataset& dataset,
                             const ActiveView& view);

double local_fim_trace_sampled(const ModelParams& model,
                               const Dataset& dataset, const ActiveView& view,
                               int n_mc, Rng& rng);

// Dataset-size-weighted average of local traces (clients in id order).
double fedfim_trace(const std::map<int, double>& local_traces,
                    const std::map<int, long long>& sizes);

// Learning-rate-weighted running sum over (lr, trace) history entries.
double cum_trace(std::span<const std::pair<double, double>> history);

}  // namespace fedsim
