#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "linksteal/autograd.hpp"
#include "linksteal/rng.hpp"
#include "linksteal/tensor.hpp"

namespace linksteal {

enum class OptimizerKind { Adam, Sgd };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

/// One Adam update (bias-corrected) over `params`; gradients are zeroed after.
void adam_step(OptimizerState& state, std::span<Parameter* const> params);
/// Plain gradient descent; gradients are zeroed after.
void sgd_step(OptimizerState& state, std::span<Parameter* const> params);
/// Dispatches on state.kind.
void optimizer_step(OptimizerState& state, std::span<Parameter* const> params);

/// lr0 * (1 + cos(pi * epoch / total)) / 2.
double cosine_anneal(double lr0, std::size_t epoch, std::size_t total);

/// Inverted dropout on a plain tensor; identity outside training.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);

struct CrossEntropyResult {
  double loss = 0.0;
  /// Gradient of the mean loss with respect to the logits that produced the
  /// posteriors: (p - onehot) / batch.
  Tensor grad_logits;
};

/// Mean -log p(label) over the rows of `posteriors`.
CrossEntropyResult cross_entropy_loss(const Tensor& posteriors, std::span<const int> labels);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace linksteal
