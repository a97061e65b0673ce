#include "linksteal/optim.hpp"

#include <cmath>
#include <numbers>

namespace linksteal {

namespace {

void ensure_moments(OptimizerState& state, std::span<Parameter* const> params) {
  if (state.first_moment.size() != params.size()) {
    state.first_moment.clear();
    state.second_moment.clear();
    for (const Parameter* p : params) {
      state.first_moment.emplace_back(p->value.rows(), p->value.cols());
      state.second_moment.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!state.first_moment[i].same_shape(params[i]->value) || !params[i]->grad.same_shape(params[i]->value)) {
      throw ShapeError("optimizer state does not match parameter " + std::to_string(i));
    }
  }
}

}  // namespace

void adam_step(OptimizerState& state, std::span<Parameter* const> params) {
  ensure_moments(state, params);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p.value[k] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
    p.value.require_finite("adam_step");
    p.zero_grad();
  }
}

void sgd_step(OptimizerState& state, std::span<Parameter* const> params) {
  ++state.step;
  for (Parameter* p : params) {
    if (!p->grad.same_shape(p->value)) throw ShapeError("sgd_step: gradient shape mismatch");
    for (std::size_t k = 0; k < p->value.size(); ++k) p->value[k] -= state.learning_rate * p->grad[k];
    p->value.require_finite("sgd_step");
    p->zero_grad();
  }
}

void optimizer_step(OptimizerState& state, std::span<Parameter* const> params) {
  if (state.kind == OptimizerKind::Adam) {
    adam_step(state, params);
  } else {
    sgd_step(state, params);
  }
}

double cosine_anneal(double lr0, std::size_t epoch, std::size_t total) {
  if (total == 0) throw std::invalid_argument("cosine_anneal: total epochs must be positive");
  if (epoch > total) throw std::invalid_argument("cosine_anneal: epoch beyond total");
  if (epoch == total) return 0.0;
  const double ratio = static_cast<double>(epoch) / static_cast<double>(total);
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * ratio));
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  const double survivor = 1.0 / (1.0 - rate);
  Tensor out = x;
  for (double& v : out.data()) v = keep(rng) ? v * survivor : 0.0;
  return out;
}

CrossEntropyResult cross_entropy_loss(const Tensor& posteriors, std::span<const int> labels) {
  if (labels.size() != posteriors.rows()) throw ShapeError("cross_entropy_loss: one label per row required");
  if (posteriors.rows() == 0) throw std::invalid_argument("cross_entropy_loss on an empty batch");
  CrossEntropyResult result;
  result.grad_logits = posteriors;
  const double n = static_cast<double>(posteriors.rows());
  for (std::size_t i = 0; i < posteriors.rows(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= posteriors.cols()) throw std::out_of_range("class label out of range");
    const double p = posteriors(i, static_cast<std::size_t>(y));
    if (!(p > 0.0)) throw NumericError("cross_entropy_loss: zero probability on the true class");
    result.loss -= std::log(p);
    result.grad_logits(i, static_cast<std::size_t>(y)) -= 1.0;
  }
  result.loss /= n;
  for (double& g : result.grad_logits.data()) g /= n;
  return result;
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> uni(-bound, bound);
  Tensor w(fan_in, fan_out);
  for (double& v : w.data()) v = uni(rng);
  return w;
}

}  // namespace linksteal
