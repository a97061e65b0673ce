#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "linksteal/rng.hpp"
#include "linksteal/tensor.hpp"

namespace linksteal {

/// A learnable tensor together with its accumulated gradient.
struct Parameter {
  Tensor value;
  Tensor grad;

  Parameter() = default;
  explicit Parameter(Tensor v) : value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

/// Directed message edges (src -> dst) over `num_nodes` nodes.
struct EdgeIndex {
  std::size_t num_nodes = 0;
  std::vector<int> dst;
  std::vector<int> src;

  std::size_t num_edges() const { return dst.size(); }
};

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
};

/// Reverse-mode computation tape. Values are appended in evaluation order, so
/// walking the tape backwards visits every node after all of its consumers.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Constant leaf that aliases `value`; the tensor must outlive the tape.
  Var constant_ref(const Tensor& value);
  /// Records `p` as a leaf aliasing p.value; backward() accumulates into p.grad.
  Var parameter(Parameter& p);

  const Tensor& value(Var v) const { return nodes_[v.id].get(); }
  /// Gradient of the last backward() output with respect to `v` (zero tensor
  /// when `v` does not influence it).
  Tensor grad(Var v) const;

  /// Back-propagates from a 1 x 1 output.
  void backward(Var output);

  std::size_t size() const { return nodes_.size(); }

  // Used by operation implementations.
  Var record(Tensor value, std::span<const std::size_t> inputs, BackwardFn fn);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const Tensor& value_at(std::size_t id) const { return nodes_[id].get(); }
  const Tensor& grad_at(std::size_t id) const { return nodes_[id].grad; }
  /// Gradient buffer of node `id`, allocated on first touch.
  Tensor& grad_buffer(std::size_t id);

 private:
  struct Node {
    Tensor value;
    const Tensor* alias = nullptr;
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;

    const Tensor& get() const { return alias != nullptr ? *alias : value; }
  };
  std::vector<Node> nodes_;
};

namespace ops {

Var add(Var a, Var b);
/// x [n x m] plus a broadcast row bias [1 x m].
Var add_bias(Var x, Var bias);
Var hadamard(Var a, Var b);
Var scale(Var x, double factor);
/// x times a 1 x 1 tape scalar.
Var scalar_mul(Var x, Var s);
Var matmul(Var a, Var b);
Var relu(Var x);
Var leaky_relu(Var x, double negative_slope);
/// Inverted dropout; identity when !training or rate == 0.
Var dropout(Var x, double rate, bool training, Rng& rng);
Var concat_cols(std::span<const Var> parts);

/// out[dst] += weight[e] * x[src] for every edge e; weights are constants.
Var aggregate(Var x, std::shared_ptr<const EdgeIndex> edges,
              std::shared_ptr<const std::vector<double>> weights);
/// Per-edge score src_scores[src] + dst_scores[dst]; inputs are n x 1.
Var edge_scores(Var src_scores, Var dst_scores, std::shared_ptr<const EdgeIndex> edges);
/// Softmax of per-edge scores (E x 1) over the edges that share a destination.
Var segment_softmax(Var scores, std::shared_ptr<const EdgeIndex> edges);
/// out[dst] += alpha[e] * x[src] with learnable alpha (E x 1).
Var edge_weighted_aggregate(Var alpha, Var x, std::shared_ptr<const EdgeIndex> edges);

Var softmax(Var logits, double temperature);
/// Mean cross-entropy of softmax(logits) against integer labels; 1 x 1.
Var softmax_cross_entropy(Var logits, std::span<const int> labels);
/// Sum of x * weights; 1 x 1. Handy as a probe loss for gradient checks.
Var dot_const(Var x, const Tensor& weights);

}  // namespace ops
}  // namespace linksteal
