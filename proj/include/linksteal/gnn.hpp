#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "linksteal/autograd.hpp"
#include "linksteal/graph.hpp"
#include "linksteal/optim.hpp"
#include "linksteal/rng.hpp"

namespace linksteal {

enum class GnnKind { Gcn, Sage, Gat, Gin };

std::string_view to_string(GnnKind kind);
/// Accepts gcn, sage (or graphsage), gat, gin.
GnnKind parse_gnn_kind(std::string_view name);

/// Directed message edges of a graph in local ids. Self-loops are taken from
/// the input edge list; they are not added implicitly.
class MessageGraph {
 public:
  MessageGraph(std::size_t num_nodes, std::span<const Edge> edges);

  /// Whole-graph structure with the self-loop convention applied to every node.
  static MessageGraph with_self_loops(const Graph& g);
  /// Structure of a query subgraph, in `sub.nodes` order.
  static MessageGraph from_subgraph(const Subgraph& sub);

  std::size_t num_nodes() const { return num_nodes_; }
  /// Every message, self-loops included.
  const std::shared_ptr<const EdgeIndex>& all() const { return all_; }
  /// 1 / in-degree of the destination, aligned with all().
  const std::shared_ptr<const std::vector<double>>& mean_weights() const { return mean_weights_; }
  /// Messages between distinct nodes only.
  const std::shared_ptr<const EdgeIndex>& proper() const { return proper_; }
  const std::shared_ptr<const std::vector<double>>& unit_weights() const { return unit_weights_; }
  /// True when some node receives no message at all.
  bool has_empty_neighborhood() const { return has_empty_; }

 private:
  std::size_t num_nodes_ = 0;
  bool has_empty_ = false;
  std::shared_ptr<const EdgeIndex> all_;
  std::shared_ptr<const std::vector<double>> mean_weights_;
  std::shared_ptr<const EdgeIndex> proper_;
  std::shared_ptr<const std::vector<double>> unit_weights_;
};

/// One message-passing layer.
///
/// Parameter layout by kind:
///   Gcn:  W [in x out], b [1 x out]
///   Sage: W [2 in x out] acting on concat(h_v, mean of neighbourhood), b
///   Gat:  per head (W [in x out/heads], a_src [out/heads x 1], a_dst), then b [1 x out]
///   Gin:  W1 [in x out], b1, W2 [out x out], b2, eps [1 x 1]
struct GnnLayer {
  GnnKind kind = GnnKind::Gcn;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t heads = 1;
  std::vector<Parameter> params;

  static GnnLayer create(GnnKind kind, std::size_t in_dim, std::size_t out_dim, std::size_t heads, Rng& rng);

  std::size_t head_dim() const { return out_dim / heads; }
};

/// Negative slope of the attention LeakyReLU.
inline constexpr double kGatNegativeSlope = 0.2;

/// Runs `layer` over `graph`. With `activate` the output passes through ReLU
/// and then dropout (training only); the output layer skips both.
Var layer_forward(Tape& tape, GnnLayer& layer, Var h, const MessageGraph& graph, bool training,
                  bool activate, double dropout_rate, Rng& rng);
/// Gradient-free evaluation over a constant layer.
Var layer_forward(Tape& tape, const GnnLayer& layer, Var h, const MessageGraph& graph, bool activate);
/// Inference on a query subgraph.
Tensor layer_forward(const GnnLayer& layer, const Tensor& h, const Subgraph& sub, bool activate = true);

struct GnnConfig {
  GnnKind kind = GnnKind::Sage;
  std::size_t hidden = 128;
  std::size_t epochs = 200;
  double learning_rate = 0.001;
  double dropout = 0.5;
  std::size_t gat_heads = 2;
  OptimizerKind optimizer = OptimizerKind::Adam;
};

/// Class-probability vector returned for one queried node.
struct Posterior {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// Two-layer node classifier. Immutable after training.
struct TrainedGnn {
  GnnKind arch = GnnKind::Sage;
  GnnLayer layer1;
  GnnLayer layer2;
  std::size_t num_classes = 0;
  double dropout = 0.5;

  std::size_t in_dim() const { return layer1.in_dim; }
  /// Logits for every node of `graph` given its feature rows.
  Tensor logits(const Tensor& features, const MessageGraph& graph) const;
  std::vector<Parameter*> parameters();
};

TrainedGnn init_gnn(const GnnConfig& config, std::size_t in_dim, std::size_t num_classes, Rng& rng);
/// Mean cross-entropy of the model over all nodes of `g` (training mode draws
/// dropout from `rng`). Gradients are accumulated into the model parameters.
double gnn_loss_and_grad(TrainedGnn& model, const Graph& g, const MessageGraph& mg, bool training, Rng& rng);

/// Full-batch training over every node of `train_graph`.
TrainedGnn train_gnn(const Graph& train_graph, const GnnConfig& config, std::uint64_t seed);

/// Posterior of the subgraph's center, softmax at `temperature`.
Posterior khop_query(const TrainedGnn& model, const Subgraph& sub, double temperature = 1.0);
/// Argmax of khop_query; ties go to the lowest class id.
int predict_label(const TrainedGnn& model, const Subgraph& sub);
int argmax(std::span<const double> values);

/// Whole-graph predictions (self-loop convention) for every node of `g`.
std::vector<int> predict_all(const TrainedGnn& model, const Graph& g);
/// Fraction of nodes of `g` classified correctly.
double node_accuracy(const TrainedGnn& model, const Graph& g);

}  // namespace linksteal
