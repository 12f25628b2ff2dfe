#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedsim/rng.hpp"

namespace fedsim {

// Dense ReLU network with a softmax cross-entropy head, stored as one flat
// double vector. Layout per layer: weights row-major [fan_out][fan_in],
// then biases [fan_out]. arch lists the widths: input dim, hidden..., classes.
struct ModelParams {
  std::vector<int> arch;
  std::vector<double> values;

  int num_classes() const { return arch.back(); }
  int input_dim() const { return arch.front(); }
};

struct Example {
  std::vector<double> x;
  int y = 0;
};

struct GradVector {
  std::vector<double> values;
};

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

std::size_t param_count(const std::vector<int>& arch);

// Throws ConfigError when arch has fewer than 2 entries, a width below 1, or
// fewer than 2 classes.
void validate_arch(const std::vector<int>& arch);

// He-style init: weights ~ N(0, 2/fan_in), biases zero. Deterministic in seed.
ModelParams init_model(const std::vector<int>& arch, std::uint64_t seed);

// Class probabilities via max-subtracted softmax. Sums to 1 within 1e-12.
std::vector<double> forward(const ModelParams& model,
                            std::span<const double> x);

// Mean cross-entropy over the batch, computed in log space.
double loss(const ModelParams& model, std::span<const Example> batch);
double loss(const ModelParams& model, const std::vector<Example>& examples,
            std::span<const int> indices);

// Mean gradient of the cross-entropy over the batch, by backpropagation.
// Examples are accumulated in batch order.
GradVector grad(const ModelParams& model, std::span<const Example> batch);
GradVector grad(const ModelParams& model, const std::vector<Example>& examples,
                std::span<const int> indices);

// w' = w - lr * (g + weight_decay * w), coordinate-wise.
ModelParams sgd_step(const ModelParams& model, const GradVector& g, double lr,
                     double weight_decay);

// Draws a label from the model's predictive distribution at x.
int sample_label(const ModelParams& model, std::span<const double> x,
                 Rng& rng);

// Accuracy (argmax ties broken toward the lowest class index) and mean loss.
EvalResult evaluate(const ModelParams& model,
                    std::span<const Example> dataset);
EvalResult evaluate(const ModelParams& model,
                    const std::vector<Example>& examples,
                    std::span<const int> indices);

}  // namespace fedsim
