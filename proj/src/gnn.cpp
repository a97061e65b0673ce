#include "linksteal/gnn.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace linksteal {

std::string_view to_string(GnnKind kind) {
  switch (kind) {
    case GnnKind::Gcn: return "gcn";
    case GnnKind::Sage: return "sage";
    case GnnKind::Gat: return "gat";
    case GnnKind::Gin: return "gin";
  }
  return "unknown";
}

GnnKind parse_gnn_kind(std::string_view name) {
  if (name == "gcn") return GnnKind::Gcn;
  if (name == "sage" || name == "graphsage") return GnnKind::Sage;
  if (name == "gat") return GnnKind::Gat;
  if (name == "gin") return GnnKind::Gin;
  throw std::invalid_argument("unknown GNN architecture '" + std::string(name) + "'");
}

MessageGraph::MessageGraph(std::size_t num_nodes, std::span<const Edge> edges) : num_nodes_(num_nodes) {
  auto all = std::make_shared<EdgeIndex>();
  auto proper = std::make_shared<EdgeIndex>();
  all->num_nodes = proper->num_nodes = num_nodes;
  std::vector<std::size_t> indeg(num_nodes, 0);
  auto push = [&](int dst, int src) {
    all->dst.push_back(dst);
    all->src.push_back(src);
    ++indeg[static_cast<std::size_t>(dst)];
    if (dst != src) {
      proper->dst.push_back(dst);
      proper->src.push_back(src);
    }
  };
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= num_nodes || static_cast<std::size_t>(e.v) >= num_nodes) {
      throw GraphError("message graph edge references an invalid node");
    }
    push(e.v, e.u);
    if (!e.is_self_loop()) push(e.u, e.v);
  }
  auto mean = std::make_shared<std::vector<double>>(all->num_edges());
  for (std::size_t e = 0; e < all->num_edges(); ++e) {
    (*mean)[e] = 1.0 / static_cast<double>(indeg[static_cast<std::size_t>(all->dst[e])]);
  }
  has_empty_ = std::any_of(indeg.begin(), indeg.end(), [](std::size_t d) { return d == 0; });
  unit_weights_ = std::make_shared<std::vector<double>>(proper->num_edges(), 1.0);
  all_ = std::move(all);
  proper_ = std::move(proper);
  mean_weights_ = std::move(mean);
}

MessageGraph MessageGraph::with_self_loops(const Graph& g) {
  std::vector<Edge> edges;
  edges.reserve(g.num_edges() + g.num_nodes());
  for (const Edge& e : g.edges())
    if (!e.is_self_loop()) edges.push_back(e);
  for (std::size_t v = 0; v < g.num_nodes(); ++v) edges.emplace_back(static_cast<NodeId>(v), static_cast<NodeId>(v));
  return MessageGraph(g.num_nodes(), edges);
}

MessageGraph MessageGraph::from_subgraph(const Subgraph& sub) {
  std::unordered_map<NodeId, int> local;
  for (std::size_t i = 0; i < sub.nodes.size(); ++i) local.emplace(sub.nodes[i], static_cast<int>(i));
  std::vector<Edge> edges;
  edges.reserve(sub.edges.size());
  for (const Edge& e : sub.edges) {
    auto a = local.find(e.u);
    auto b = local.find(e.v);
    if (a == local.end() || b == local.end()) throw GraphError("subgraph edge outside its node set");
    edges.emplace_back(a->second, b->second);
  }
  return MessageGraph(sub.nodes.size(), edges);
}

GnnLayer GnnLayer::create(GnnKind kind, std::size_t in_dim, std::size_t out_dim, std::size_t heads, Rng& rng) {
  if (in_dim == 0 || out_dim == 0) throw std::invalid_argument("GNN layer dimensions must be positive");
  GnnLayer layer;
  layer.kind = kind;
  layer.in_dim = in_dim;
  layer.out_dim = out_dim;
  layer.heads = kind == GnnKind::Gat ? heads : 1;
  if (layer.heads == 0 || out_dim % layer.heads != 0) {
    throw std::invalid_argument("GAT output width must be a multiple of the head count");
  }
  auto bias = [&](std::size_t n) { return Parameter(Tensor(1, n)); };
  switch (kind) {
    case GnnKind::Gcn:
      layer.params.emplace_back(glorot_uniform(in_dim, out_dim, rng));
      layer.params.push_back(bias(out_dim));
      break;
    case GnnKind::Sage:
      layer.params.emplace_back(glorot_uniform(2 * in_dim, out_dim, rng));
      layer.params.push_back(bias(out_dim));
      break;
    case GnnKind::Gat: {
      const std::size_t hd = layer.head_dim();
      for (std::size_t h = 0; h < layer.heads; ++h) {
        layer.params.emplace_back(glorot_uniform(in_dim, hd, rng));
        layer.params.emplace_back(glorot_uniform(hd, 1, rng));
        layer.params.emplace_back(glorot_uniform(hd, 1, rng));
      }
      layer.params.push_back(bias(out_dim));
      break;
    }
    case GnnKind::Gin:
      layer.params.emplace_back(glorot_uniform(in_dim, out_dim, rng));
      layer.params.push_back(bias(out_dim));
      layer.params.emplace_back(glorot_uniform(out_dim, out_dim, rng));
      layer.params.push_back(bias(out_dim));
      layer.params.emplace_back(Tensor(1, 1, 0.0));
      break;
  }
  return layer;
}

namespace {

Var bind(Tape& tape, Parameter& p) { return tape.parameter(p); }
Var bind(Tape& tape, const Parameter& p) { return tape.constant_ref(p.value); }

template <class Layer>
Var forward_impl(Tape& tape, Layer& layer, Var h, const MessageGraph& graph, bool training, bool activate,
                 double dropout_rate, Rng* rng) {
  const Tensor& hv = h.value();
  if (hv.rows() != graph.num_nodes()) {
    throw ShapeError("layer input has " + std::to_string(hv.rows()) + " rows for " +
                     std::to_string(graph.num_nodes()) + " nodes");
  }
  if (hv.cols() != layer.in_dim) {
    throw ShapeError("layer expects " + std::to_string(layer.in_dim) + " input features, got " +
                     std::to_string(hv.cols()));
  }
  if (layer.kind != GnnKind::Gin && graph.has_empty_neighborhood()) {
    throw GraphError("node with an empty neighbourhood and no self-loop");
  }

  Var out;
  switch (layer.kind) {
    case GnnKind::Gcn: {
      Var z = ops::matmul(h, bind(tape, layer.params[0]));
      out = ops::aggregate(z, graph.all(), graph.mean_weights());
      out = ops::add_bias(out, bind(tape, layer.params[1]));
      break;
    }
    case GnnKind::Sage: {
      Var mean = ops::aggregate(h, graph.all(), graph.mean_weights());
      const Var parts[] = {h, mean};
      Var cat = ops::concat_cols(parts);
      out = ops::add_bias(ops::matmul(cat, bind(tape, layer.params[0])), bind(tape, layer.params[1]));
      break;
    }
    case GnnKind::Gat: {
      std::vector<Var> head_outputs;
      for (std::size_t k = 0; k < layer.heads; ++k) {
        Var z = ops::matmul(h, bind(tape, layer.params[3 * k]));
        Var s_src = ops::matmul(z, bind(tape, layer.params[3 * k + 1]));
        Var s_dst = ops::matmul(z, bind(tape, layer.params[3 * k + 2]));
        Var e = ops::leaky_relu(ops::edge_scores(s_src, s_dst, graph.all()), kGatNegativeSlope);
        Var alpha = ops::segment_softmax(e, graph.all());
        head_outputs.push_back(ops::edge_weighted_aggregate(alpha, z, graph.all()));
      }
      out = head_outputs.size() == 1 ? head_outputs.front() : ops::concat_cols(head_outputs);
      out = ops::add_bias(out, bind(tape, layer.params[3 * layer.heads]));
      break;
    }
    case GnnKind::Gin: {
      Var eps = bind(tape, layer.params[4]);
      Var self = ops::add(h, ops::scalar_mul(h, eps));
      Var summed = ops::add(self, ops::aggregate(h, graph.proper(), graph.unit_weights()));
      Var hidden = ops::relu(ops::add_bias(ops::matmul(summed, bind(tape, layer.params[0])), bind(tape, layer.params[1])));
      out = ops::add_bias(ops::matmul(hidden, bind(tape, layer.params[2])), bind(tape, layer.params[3]));
      break;
    }
  }
  if (activate) {
    out = ops::relu(out);
    if (training) out = ops::dropout(out, dropout_rate, true, *rng);
  }
  return out;
}

}  // namespace

Var layer_forward(Tape& tape, GnnLayer& layer, Var h, const MessageGraph& graph, bool training, bool activate,
                  double dropout_rate, Rng& rng) {
  return forward_impl(tape, layer, h, graph, training, activate, dropout_rate, &rng);
}

Var layer_forward(Tape& tape, const GnnLayer& layer, Var h, const MessageGraph& graph, bool activate) {
  return forward_impl(tape, layer, h, graph, false, activate, 0.0, nullptr);
}

Tensor layer_forward(const GnnLayer& layer, const Tensor& h, const Subgraph& sub, bool activate) {
  Tape tape;
  const MessageGraph mg = MessageGraph::from_subgraph(sub);
  return layer_forward(tape, layer, tape.constant_ref(h), mg, activate).value();
}

Tensor TrainedGnn::logits(const Tensor& features, const MessageGraph& graph) const {
  Tape tape;
  Var h = layer_forward(tape, layer1, tape.constant_ref(features), graph, true);
  Var z = layer_forward(tape, layer2, h, graph, false);
  Tensor out = z.value();
  out.require_finite("gnn forward");
  return out;
}

std::vector<Parameter*> TrainedGnn::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : layer1.params) out.push_back(&p);
  for (auto& p : layer2.params) out.push_back(&p);
  return out;
}

TrainedGnn init_gnn(const GnnConfig& config, std::size_t in_dim, std::size_t num_classes, Rng& rng) {
  if (num_classes < 2) throw std::invalid_argument("node classification needs at least two classes");
  TrainedGnn model;
  model.arch = config.kind;
  model.num_classes = num_classes;
  model.dropout = config.dropout;
  if (config.kind == GnnKind::Gat) {
    model.layer1 = GnnLayer::create(config.kind, in_dim, config.hidden * config.gat_heads, config.gat_heads, rng);
    model.layer2 = GnnLayer::create(config.kind, model.layer1.out_dim, num_classes, 1, rng);
  } else {
    model.layer1 = GnnLayer::create(config.kind, in_dim, config.hidden, 1, rng);
    model.layer2 = GnnLayer::create(config.kind, config.hidden, num_classes, 1, rng);
  }
  return model;
}

double gnn_loss_and_grad(TrainedGnn& model, const Graph& g, const MessageGraph& mg, bool training, Rng& rng) {
  Tape tape;
  Var h = layer_forward(tape, model.layer1, tape.constant_ref(g.features()), mg, training, true, model.dropout, rng);
  Var z = layer_forward(tape, model.layer2, h, mg, training, false, model.dropout, rng);
  Var loss = ops::softmax_cross_entropy(z, g.labels());
  const double value = loss.value()(0, 0);
  tape.backward(loss);
  return value;
}

TrainedGnn train_gnn(const Graph& train_graph, const GnnConfig& config, std::uint64_t seed) {
  if (train_graph.num_nodes() == 0) throw std::invalid_argument("cannot train on an empty graph");
  Rng init_rng = make_rng(seed, "gnn-init");
  Rng dropout_rng = make_rng(seed, "gnn-dropout");
  TrainedGnn model = init_gnn(config, train_graph.feature_dim(), train_graph.num_classes(), init_rng);
  const MessageGraph mg = MessageGraph::with_self_loops(train_graph);
  OptimizerState opt;
  opt.kind = config.optimizer;
  opt.learning_rate = config.learning_rate;
  auto params = model.parameters();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    gnn_loss_and_grad(model, train_graph, mg, true, dropout_rng);
    optimizer_step(opt, params);
  }
  return model;
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return static_cast<int>(best);
}

Posterior khop_query(const TrainedGnn& model, const Subgraph& sub, double temperature) {
  if (sub.feature_view.cols() != model.in_dim()) {
    throw ShapeError("query features have " + std::to_string(sub.feature_view.cols()) + " columns, model expects " +
                     std::to_string(model.in_dim()));
  }
  const MessageGraph mg = MessageGraph::from_subgraph(sub);
  const Tensor z = model.logits(sub.feature_view, mg);
  const Tensor center = Tensor::row_vector(z.row(0));
  const Tensor p = softmax_with_temperature(center, temperature);
  return Posterior{p.data()};
}

int predict_label(const TrainedGnn& model, const Subgraph& sub) {
  return argmax(khop_query(model, sub).values);
}

std::vector<int> predict_all(const TrainedGnn& model, const Graph& g) {
  const Tensor z = model.logits(g.features(), MessageGraph::with_self_loops(g));
  std::vector<int> out(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) out[i] = argmax(z.row(i));
  return out;
}

double node_accuracy(const TrainedGnn& model, const Graph& g) {
  if (g.num_nodes() == 0) throw std::invalid_argument("accuracy on an empty graph");
  const auto pred = predict_all(model, g);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == g.labels()[i];
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace linksteal
