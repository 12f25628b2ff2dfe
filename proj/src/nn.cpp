#include "fedsim/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsim/errors.hpp"
#include "nn_internal.hpp"

namespace fedsim {

namespace detail {

std::vector<LayerView> layer_views(const ModelParams& model) {
  const std::size_t num_layers = model.arch.size() - 1;
  std::vector<LayerView> views(num_layers);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const int fan_in = model.arch[l];
    const int fan_out = model.arch[l + 1];
    views[l].fan_in = fan_in;
    views[l].fan_out = fan_out;
    views[l].offset = offset;
    views[l].weights = model.values.data() + offset;
    views[l].bias = model.values.data() + offset +
                    static_cast<std::size_t>(fan_in) * fan_out;
    offset += static_cast<std::size_t>(fan_in + 1) * fan_out;
  }
  return views;
}

void NnScratch::resize_for(const std::vector<int>& arch) {
  const std::size_t num_layers = arch.size() - 1;
  z.resize(num_layers);
  a.resize(num_layers);
  std::size_t widest = 0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    z[l].assign(static_cast<std::size_t>(arch[l + 1]), 0.0);
    a[l].assign(static_cast<std::size_t>(arch[l + 1]), 0.0);
    widest = std::max(widest, static_cast<std::size_t>(arch[l + 1]));
  }
  delta.assign(widest, 0.0);
  delta_prev.assign(widest, 0.0);
}

double forward_example(std::span<const LayerView> layers,
                       std::span<const double> x, NnScratch& scratch) {
  const double* input = x.data();
  const std::size_t num_layers = layers.size();
  for (std::size_t l = 0; l < num_layers; ++l) {
    const LayerView& layer = layers[l];
    double* z = scratch.z[l].data();
    for (int o = 0; o < layer.fan_out; ++o) {
      const double* row = layer.weights + static_cast<std::size_t>(o) * layer.fan_in;
      double s = layer.bias[o];
      for (int i = 0; i < layer.fan_in; ++i) s += row[i] * input[i];
      z[o] = s;
    }
    if (l + 1 < num_layers) {
      double* a = scratch.a[l].data();
      for (int o = 0; o < layer.fan_out; ++o) a[o] = z[o] > 0.0 ? z[o] : 0.0;
      input = a;
    }
  }

  // Max-subtracted softmax on the output logits.
  const auto& logits = scratch.z.back();
  auto& probs = scratch.a.back();
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t o = 0; o < logits.size(); ++o) {
    probs[o] = std::exp(logits[o] - max_logit);
    sum += probs[o];
  }
  const double inv_sum = 1.0 / sum;
  for (double& p : probs) p *= inv_sum;
  return max_logit + std::log(sum);
}

void backward_accumulate(std::span<const LayerView> layers,
                         std::span<const double> x, int label,
                         NnScratch& scratch, std::span<double> grad_acc) {
  const std::size_t num_layers = layers.size();
  const auto& probs = scratch.a.back();
  double* delta = scratch.delta.data();
  for (std::size_t o = 0; o < probs.size(); ++o) {
    delta[o] = probs[o] - (static_cast<int>(o) == label ? 1.0 : 0.0);
  }

  for (std::size_t l = num_layers; l-- > 0;) {
    const LayerView& layer = layers[l];
    const double* input = l == 0 ? x.data() : scratch.a[l - 1].data();
    double* gw = grad_acc.data() + layer.offset;
    double* gb = gw + static_cast<std::size_t>(layer.fan_in) * layer.fan_out;
    for (int o = 0; o < layer.fan_out; ++o) {
      const double d = delta[o];
      double* grow = gw + static_cast<std::size_t>(o) * layer.fan_in;
      for (int i = 0; i < layer.fan_in; ++i) grow[i] += d * input[i];
      gb[o] += d;
    }
    if (l == 0) break;

    double* prev = scratch.delta_prev.data();
    const double* z_prev = scratch.z[l - 1].data();
    for (int i = 0; i < layer.fan_in; ++i) {
      double s = 0.0;
      for (int o = 0; o < layer.fan_out; ++o) {
        s += layer.weights[static_cast<std::size_t>(o) * layer.fan_in + i] * delta[o];
      }
      prev[i] = z_prev[i] > 0.0 ? s : 0.0;
    }
    std::swap(scratch.delta, scratch.delta_prev);
    delta = scratch.delta.data();
  }
}

double backward_sq_norm(std::span<const LayerView> layers,
                        std::span<const double> x, int label,
                        NnScratch& scratch) {
  const std::size_t num_layers = layers.size();
  const auto& probs = scratch.a.back();
  double* delta = scratch.delta.data();
  for (std::size_t o = 0; o < probs.size(); ++o) {
    delta[o] = probs[o] - (static_cast<int>(o) == label ? 1.0 : 0.0);
  }

  double total = 0.0;
  for (std::size_t l = num_layers; l-- > 0;) {
    const LayerView& layer = layers[l];
    const double* input = l == 0 ? x.data() : scratch.a[l - 1].data();
    double delta_sq = 0.0;
    for (int o = 0; o < layer.fan_out; ++o) delta_sq += delta[o] * delta[o];
    double input_sq = 0.0;
    for (int i = 0; i < layer.fan_in; ++i) input_sq += input[i] * input[i];
    // ||delta (x) input||_F^2 + ||delta||^2 for the bias block.
    total += delta_sq * (input_sq + 1.0);
    if (l == 0) break;

    double* prev = scratch.delta_prev.data();
    const double* z_prev = scratch.z[l - 1].data();
    for (int i = 0; i < layer.fan_in; ++i) {
      double s = 0.0;
      for (int o = 0; o < layer.fan_out; ++o) {
        s += layer.weights[static_cast<std::size_t>(o) * layer.fan_in + i] * delta[o];
      }
      prev[i] = z_prev[i] > 0.0 ? s : 0.0;
    }
    std::swap(scratch.delta, scratch.delta_prev);
    delta = scratch.delta.data();
  }
  return total;
}

}  // namespace detail

namespace {

void check_example(const ModelParams& model, const Example& ex) {
  if (static_cast<int>(ex.x.size()) != model.input_dim()) {
    throw InputError("example feature length " + std::to_string(ex.x.size()) +
                     " does not match input dim " +
                     std::to_string(model.input_dim()));
  }
  if (ex.y < 0 || ex.y >= model.num_classes()) {
    throw InputError("label " + std::to_string(ex.y) + " out of range for " +
                     std::to_string(model.num_classes()) + " classes");
  }
}

int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

std::size_t param_count(const std::vector<int>& arch) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < arch.size(); ++l) {
    count += static_cast<std::size_t>(arch[l] + 1) * arch[l + 1];
  }
  return count;
}

void validate_arch(const std::vector<int>& arch) {
  if (arch.size() < 2) {
    throw ConfigError("arch needs at least input and output widths");
  }
  for (int w : arch) {
    if (w < 1) throw ConfigError("arch widths must be >= 1");
  }
  if (arch.back() < 2) {
    throw ConfigError("arch must end with at least 2 classes");
  }
}

ModelParams init_model(const std::vector<int>& arch, std::uint64_t seed) {
  validate_arch(arch);
  ModelParams model;
  model.arch = arch;
  model.values.assign(param_count(arch), 0.0);
  Rng rng(stream_seed(seed, streams::kInit));
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < arch.size(); ++l) {
    const std::size_t n_weights =
        static_cast<std::size_t>(arch[l]) * arch[l + 1];
    const double stddev = std::sqrt(2.0 / arch[l]);
    for (std::size_t i = 0; i < n_weights; ++i) {
      model.values[offset + i] = stddev * rng.normal();
    }
    offset += n_weights + arch[l + 1];  // biases stay zero
  }
  return model;
}

std::vector<double> forward(const ModelParams& model,
                            std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.input_dim()) {
    throw InputError("input length " + std::to_string(x.size()) +
                     " does not match input dim " +
                     std::to_string(model.input_dim()));
  }
  detail::NnScratch scratch;
  scratch.resize_for(model.arch);
  const auto layers = detail::layer_views(model);
  detail::forward_example(layers, x, scratch);
  return scratch.a.back();
}

double loss(const ModelParams& model, std::span<const Example> batch) {
  if (batch.empty()) throw InputError("loss: empty batch");
  detail::NnScratch scratch;
  scratch.resize_for(model.arch);
  const auto layers = detail::layer_views(model);
  double total = 0.0;
  for (const Example& ex : batch) {
    check_example(model, ex);
    const double lse = detail::forward_example(layers, ex.x, scratch);
    total += lse - scratch.z.back()[ex.y];
  }
  return total / static_cast<double>(batch.size());
}

double loss(const ModelParams& model, const std::vector<Example>& examples,
            std::span<const int> indices) {
  if (indices.empty()) throw InputError("loss: empty batch");
  detail::NnScratch scratch;
  scratch.resize_for(model.arch);
  const auto layers = detail::layer_views(model);
  double total = 0.0;
  for (int idx : indices) {
    const Example& ex = examples.at(static_cast<std::size_t>(idx));
    check_example(model, ex);
    const double lse = detail::forward_example(layers, ex.x, scratch);
    total += lse - scratch.z.back()[ex.y];
  }
  return total / static_cast<double>(indices.size());
}

GradVector grad(const ModelParams& model, std::span<const Example> batch) {
  if (batch.empty()) throw InputError("grad: empty batch");
  GradVector g;
  g.values.assign(model.values.size(), 0.0);
  detail::NnScratch scratch;
  scratch.resize_for(model.arch);
  const auto layers = detail::layer_views(model);
  for (const Example& ex : batch) {
    check_example(model, ex);
    detail::forward_example(layers, ex.x, scratch);
    detail::backward_accumulate(layers, ex.x, ex.y, scratch, g.values);
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (double& v : g.values) v *= inv_n;
  return g;
}

GradVector grad(const ModelParams& model, const std::vector<Example>& examples,
                std::span<const int> indices) {
  if (indices.empty()) throw InputError("grad: empty batch");
  GradVector g;
  g.values.assign(model.values.size(), 0.0);
  detail::NnScratch scratch;
  scratch.resize_for(model.arch);
  const auto layers = detail::layer_views(model);
  for (int idx : indices) {
    const Example& ex = examples.at(static_cast<std::size_t>(idx));
    check_example(model, ex);
    detail::forward_example(layers, ex.x, scratch);
    detail::backward_accumulate(layers, ex.x, ex.y, scratch, g.values);
  }
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  for (double& v : g.values) v *= inv_n;
  return g;
}

ModelParams sgd_step(const ModelParams& model, const GradVector& g, double lr,
                     double weight_decay) {
  if (lr <= 0.0) throw ConfigError("sgd_step: learning rate must be > 0");
  if (weight_decay < 0.0) throw ConfigError("sgd_step: weight decay must be >= 0");
  if (g.values.size() != model.values.size()) {
    throw InputError("sgd_step: gradient size does not match model");
  }
  ModelParams next = model;
  detail::apply_sgd(next.values, g.values, lr, weight_decay);
  return next;
}

int sample_label(const ModelParams& model, std::span<const double> x,
                 Rng& rng) {
  const std::vector<double> probs = forward(model, x);
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (std::size_t c = 0; c + 1 < probs.size(); ++c) {
    cumulative += probs[c];
    if (u < cumulative) return static_cast<int>(c);
  }
  return static_cast<int>(probs.size()) - 1;
}

EvalResult evaluate(const ModelParams& model,
                    std::span<const Example> dataset) {
  if (dataset.empty()) throw InputError("evaluate: empty dataset");
  detail::NnScratch scratch;
  scratch.resize_for(model.arch);
  const auto layers = detail::layer_views(model);
  std::size_t correct = 0;
  double total_loss = 0.0;
  for (const Example& ex : dataset) {
    check_example(model, ex);
    const double lse = detail::forward_example(layers, ex.x, scratch);
    total_loss += lse - scratch.z.back()[ex.y];
    if (argmax_lowest(scratch.a.back()) == ex.y) ++correct;
  }
  const double n = static_cast<double>(dataset.size());
  return {static_cast<double>(correct) / n, total_loss / n};
}

EvalResult evaluate(const ModelParams& model,
                    const std::vector<Example>& examples,
                    std::span<const int> indices) {
  if (indices.empty()) throw InputError("evaluate: empty dataset");
  detail::NnScratch scratch;
  scratch.resize_for(model.arch);
  const auto layers = detail::layer_views(model);
  std::size_t correct = 0;
  double total_loss = 0.0;
  for (int idx : indices) {
    const Example& ex = examples.at(static_cast<std::size_t>(idx));
    check_example(model, ex);
    const double lse = detail::forward_example(layers, ex.x, scratch);
    total_loss += lse - scratch.z.back()[ex.y];
    if (argmax_lowest(scratch.a.back()) == ex.y) ++correct;
  }
  const double n = static_cast<double>(indices.size());
  return {static_cast<double>(correct) / n, total_loss / n};
}

}  // namespace fedsim
