#pragma once

// Shared between nn.cpp and fisher.cpp: reusable forward/backward buffers so
// the per-example hot paths do not allocate.

#include <cstddef>
#include <span>
#include <vector>

#include "fedsim/nn.hpp"

namespace fedsim::detail {

struct LayerView {
  int fan_in = 0;
  int fan_out = 0;
  std::size_t offset = 0;           // start of this layer's block in values
  const double* weights = nullptr;  // row-major [fan_out][fan_in]
  const double* bias = nullptr;
};

std::vector<LayerView> layer_views(const ModelParams& model);

// Per-call scratch. z[l] holds pre-activations of layer l, a[l] the
// post-activation outputs (a.back() is reused for softmax probabilities).
struct NnScratch {
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> a;
  std::vector<double> delta;
  std::vector<double> delta_prev;

  void resize_for(const std::vector<int>& arch);
};

// Fills scratch with activations and softmax probabilities for one example.
// Returns the log-sum-exp of the output logits (so that per-example
// cross-entropy is lse - z[y]).
double forward_example(std::span<const LayerView> layers,
                       std::span<const double> x, NnScratch& scratch);

// Backpropagates one example's cross-entropy gradient and adds it into
// grad_acc (same layout as ModelParams::values).
void backward_accumulate(std::span<const LayerView> layers,
                         std::span<const double> x, int label,
                         NnScratch& scratch, std::span<double> grad_acc);

// Backpropagates one example for the given label and returns the squared
// L2 norm of the full parameter gradient without materializing it:
// per layer, ||dW||^2 = ||delta||^2 * ||a_in||^2 and ||db||^2 = ||delta||^2.
// Requires scratch to hold the activations of a prior forward_example call.
double backward_sq_norm(std::span<const LayerView> layers,
                        std::span<const double> x, int label,
                        NnScratch& scratch);

// The one SGD update kernel: w -= lr * (g + wd * w). sgd_step and
// local_train both go through here so their arithmetic is bit-identical.
inline void apply_sgd(std::vector<double>& weights,
                      const std::vector<double>& gradient, double lr,
                      double weight_decay) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] -= lr * (gradient[i] + weight_decay * weights[i]);
  }
}

}  // namespace fedsim::detail
