#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "linksteal/gnn.hpp"
#include "linksteal/features.hpp"
#include "linksteal/graph.hpp"

namespace linksteal {

enum class DefenseKind { None, LabelOnly, SoftPosterior, EdgeRand, LapGraph };

std::string_view to_string(DefenseKind kind);
/// Accepts none, label (label_only), soft (soft_posterior), edgerand
/// (edge_rand), lapgraph (lap_graph).
DefenseKind parse_defense_kind(std::string_view name);

struct DefenseConfig {
  DefenseKind kind = DefenseKind::None;
  double temperature = 20.0;
  double epsilon = 1.0;
  /// Share of epsilon spent on estimating the edge count (LapGraph).
  double budget_split = 0.01;

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
  bool perturbs_graph() const { return kind == DefenseKind::EdgeRand || kind == DefenseKind::LapGraph; }
};

/// Dense symmetric 0/1 adjacency with an empty diagonal.
class PerturbedAdjacency {
 public:
  explicit PerturbedAdjacency(std::size_t n = 0) : n_(n), cells_(n * n, 0) {}
  static PerturbedAdjacency from_graph(const Graph& g);

  std::size_t size() const { return n_; }
  bool operator()(std::size_t i, std::size_t j) const { return cells_[i * n_ + j] != 0; }
  /// Sets both (i, j) and (j, i); i != j.
  void set(std::size_t i, std::size_t j, bool value);

  std::size_t num_edges() const;
  std::vector<Edge> edges() const;
  bool symmetric() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// One-hot(label_u) + one-hot(label_v), length num_classes.
std::vector<double> label_only_feature(int label_u, int label_v, std::size_t num_classes);

/// 2 / (e^epsilon + 1).
double edge_rand_flip_probability(double epsilon);

/// Flips every upper-triangular cell independently with
/// edge_rand_flip_probability(epsilon), then mirrors.
PerturbedAdjacency edge_rand(const PerturbedAdjacency& adj, double epsilon, std::uint64_t seed);

struct LapGraphResult {
  PerturbedAdjacency adjacency;
  /// Noisy edge count; the output holds exactly this many edges.
  std::size_t estimated_edges = 0;
};

/// Spends budget_split * epsilon on a Laplace edge-count estimate and the rest
/// on Laplace noise over every upper-triangular cell, then keeps the largest
/// noisy cells (ties to the lower cell index).
LapGraphResult lap_graph(const PerturbedAdjacency& adj, double epsilon, double budget_split, std::uint64_t seed);

/// `g` over the defense's perturbed edge set; `g` itself for query-time defenses.
Graph perturb_graph(const Graph& g, const DefenseConfig& defense, std::uint64_t seed);

/// What one query returns under a defense: a posterior, or for label-only
/// outputs the one-hot vector of the predicted class.
struct DefendedResponse {
  std::vector<double> values;
  bool label_only = false;
};

DefendedResponse apply_defended_query(const TrainedGnn& model, const Subgraph& sub, const DefenseConfig& defense);

/// Pair input replacing the posterior block: label_only_feature for
/// label-only responses, pairwise_ops of the posteriors otherwise.
std::vector<double> defended_pair_feature(const DefendedResponse& u, const DefendedResponse& v,
                                          PairwiseOpSet ops = kAllPairwiseOps);

}  // namespace linksteal
