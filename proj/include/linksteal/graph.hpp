#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linksteal/tensor.hpp"

namespace linksteal {

using NodeId = int;

/// Unordered node pair, stored with u <= v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  Edge() = default;
  Edge(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

  bool is_self_loop() const { return u == v; }
  bool touches(NodeId x) const { return u == x || v == x; }
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Undirected simple attributed graph over dense node ids [0, n).
/// Immutable after construction.
class Graph {
 public:
  Graph() = default;
  /// Edges are normalised, deduplicated and sorted. `num_classes` of zero
  /// means max(label) + 1.
  Graph(std::size_t num_nodes, std::vector<Edge> edges, Tensor features, std::vector<int> labels,
        std::size_t num_classes = 0);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t feature_dim() const { return features_.cols(); }
  std::size_t num_classes() const { return num_classes_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const Tensor& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }

  /// Sorted neighbour ids of v (v itself only when a self-loop exists).
  std::span<const NodeId> adjacency(NodeId v) const;
  std::size_t degree(NodeId v) const { return adjacency(v).size(); }
  bool has_edge(NodeId a, NodeId b) const;
  bool valid(NodeId v) const { return v >= 0 && static_cast<std::size_t>(v) < num_nodes_; }
  void check_node(NodeId v) const;

  /// Same nodes, features and labels over a different edge set.
  Graph with_edges(std::vector<Edge> edges) const;

 private:
  std::size_t num_nodes_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  Tensor features_;
  std::vector<int> labels_;
};

/// All u with {u, v} an edge.
std::vector<NodeId> neighbors(const Graph& g, NodeId v);

/// Depth-limited neighbourhood of `center` as seen by a querier.
///
/// `nodes` lists parent ids in breadth-first discovery order (center first);
/// `edges` holds the induced edges in parent ids plus a self-loop on every
/// included node. `feature_view` holds the parent feature rows in `nodes`
/// order.
struct Subgraph {
  NodeId center = 0;
  int hop = 0;
  std::vector<NodeId> nodes;
  std::vector<Edge> edges;
  Tensor feature_view;
  std::optional<Edge> excluded;

  /// Position of a parent id inside `nodes`, or -1.
  int local_index(NodeId parent) const;
  /// Induced edges without the self-loops.
  std::vector<Edge> proper_edges() const;
};

/// Breadth-first subgraph of depth k in (g minus `exclude`). k == 0 yields
/// the center with a single self-loop.
Subgraph khop_subgraph(const Graph& g, NodeId v, int k, std::optional<Edge> exclude = std::nullopt);

/// Subgraph induced by `nodes` (in the given order); features and labels
/// follow, num_classes is inherited from the parent.
Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

struct LoadedDataset {
  Graph graph;
  /// External id of every dense node id (row order of features.csv).
  std::vector<std::string> external_ids;
};

/// Reads edges.tsv, features.csv, labels.csv (and nodes.txt when present,
/// mapping external ids to rows). Directed input is symmetrised and
/// self-loops are dropped.
LoadedDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const std::filesystem::path& dir, const Graph& g);

}  // namespace linksteal
