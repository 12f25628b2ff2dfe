#include "fedsim/fisher.hpp"

#include <cmath>
#include <string>

#include "fedsim/errors.hpp"
#include "nn_internal.hpp"

namespace fedsim {

double local_fim_trace_exact(const ModelParams& model, const Dataset& dataset,
                             const ActiveView& view) {
  const auto indices = view.active_indices();
  if (indices.empty()) throw InputError("local_fim_trace: empty active set");

  detail::NnScratch scratch;
  scratch.resize_for(model.arch);
  const auto layers = detail::layer_views(model);
  const int num_classes = model.num_classes();

  double total = 0.0;
  for (int idx : indices) {
    const Example& ex = dataset.examples.at(static_cast<std::size_t>(idx));
    detail::forward_example(layers, ex.x, scratch);
    // backward_sq_norm only writes the delta buffers, so probs stay valid.
    const auto& probs = scratch.a.back();
    double inner = 0.0;
    for (int y = 0; y < num_classes; ++y) {
      inner += probs[static_cast<std::size_t>(y)] *
               detail::backward_sq_norm(layers, ex.x, y, scratch);
    }
    total += inner;
  }
  return total / static_cast<double>(indices.size());
}

double local_fim_trace_sampled(const ModelParams& model,
                               const Dataset& dataset, const ActiveView& view,
                               int n_mc, Rng& rng) {
  const auto indices = view.active_indices();
  if (indices.empty()) throw InputError("local_fim_trace: empty active set");
  if (n_mc < 1) {
    throw ConfigError("local_fim_trace: sampled mode needs n_mc >= 1");
  }

  detail::NnScratch scratch;
  scratch.resize_for(model.arch);
  const auto layers = detail::layer_views(model);
  const int num_classes = model.num_classes();

  double total = 0.0;
  for (int s = 0; s < n_mc; ++s) {
    const int idx = indices[rng.index(indices.size())];
    const Example& ex = dataset.examples.at(static_cast<std::size_t>(idx));
    detail::forward_example(layers, ex.x, scratch);

    // Draw y from the predictive distribution via the CDF.
    const auto& probs = scratch.a.back();
    const double u = rng.uniform01();
    int label = num_classes - 1;
    double cumulative = 0.0;
    for (int c = 0; c + 1 < num_classes; ++c) {
      cumulative += probs[static_cast<std::size_t>(c)];
      if (u < cumulative) {
        label = c;
        break;
      }
    }
    total += detail::backward_sq_norm(layers, ex.x, label, scratch);
  }
  return total / static_cast<double>(n_mc);
}

double local_fim_trace(const ModelParams& model, const Dataset& dataset,
                       const ActiveView& view, FimMode mode, int n_mc,
                       Rng* rng) {
  if (mode == FimMode::kExact) {
    return local_fim_trace_exact(model, dataset, view);
  }
  if (rng == nullptr) {
    throw InputError("local_fim_trace: sampled mode needs an rng");
  }
  return local_fim_trace_sampled(model, dataset, view, n_mc, *rng);
}

double fedfim_trace(const std::map<int, double>& local_traces,
                    const std::map<int, long long>& sizes) {
  if (local_traces.empty() || local_traces.size() != sizes.size()) {
    throw InputError("fedfim_trace: trace and size maps must match");
  }
  long long total_size = 0;
  for (const auto& [client, size] : sizes) {
    if (local_traces.find(client) == local_traces.end()) {
      throw InputError("fedfim_trace: size entry for unknown client " +
                       std::to_string(client));
    }
    if (size < 1) throw InputError("fedfim_trace: sizes must be >= 1");
    total_size += size;
  }

  double weighted = 0.0;
  for (const auto& [client, trace] : local_traces) {
    const double weight = static_cast<double>(sizes.at(client)) /
                          static_cast<double>(total_size);
    weighted += weight * trace;
  }
  return weighted;
}

double cum_trace(std::span<const std::pair<double, double>> history) {
  double total = 0.0;
  for (const auto& [lr, trace] : history) {
    if (!(lr > 0.0)) throw InputError("cum_trace: learning rates must be > 0");
    if (trace < 0.0) throw InputError("cum_trace: traces must be >= 0");
    total += lr * trace;
  }
  return total;
}

}  // namespace fedsim
