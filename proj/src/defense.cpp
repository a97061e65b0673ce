#include "linksteal/defense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "linksteal/features.hpp"
#include "linksteal/rng.hpp"

namespace linksteal {

std::string_view to_string(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::None: return "none";
    case DefenseKind::LabelOnly: return "label";
    case DefenseKind::SoftPosterior: return "soft";
    case DefenseKind::EdgeRand: return "edgerand";
    case DefenseKind::LapGraph: return "lapgraph";
  }
  return "unknown";
}

DefenseKind parse_defense_kind(std::string_view name) {
  if (name == "none") return DefenseKind::None;
  if (name == "label" || name == "label_only") return DefenseKind::LabelOnly;
  if (name == "soft" || name == "soft_posterior") return DefenseKind::SoftPosterior;
  if (name == "edgerand" || name == "edge_rand") return DefenseKind::EdgeRand;
  if (name == "lapgraph" || name == "lap_graph") return DefenseKind::LapGraph;
  throw std::invalid_argument("unknown defense '" + std::string(name) + "'");
}

void DefenseConfig::validate() const {
  if (!(temperature > 0.0)) throw std::invalid_argument("defense temperature must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("privacy budget epsilon must be positive");
  if (!(budget_split > 0.0 && budget_split < 1.0)) throw std::invalid_argument("budget split must lie in (0, 1)");
}

PerturbedAdjacency PerturbedAdjacency::from_graph(const Graph& g) {
  PerturbedAdjacency adj(g.num_nodes());
  for (const Edge& e : g.edges())
    if (!e.is_self_loop()) adj.set(static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v), true);
  return adj;
}

void PerturbedAdjacency::set(std::size_t i, std::size_t j, bool value) {
  if (i >= n_ || j >= n_) throw std::out_of_range("adjacency cell out of range");
  if (i == j) throw std::invalid_argument("adjacency diagonal stays empty");
  cells_[i * n_ + j] = value ? 1 : 0;
  cells_[j * n_ + i] = value ? 1 : 0;
}

std::size_t PerturbedAdjacency::num_edges() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) count += cells_[i * n_ + j];
  return count;
}

std::vector<Edge> PerturbedAdjacency::edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (cells_[i * n_ + j] != 0) out.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
  return out;
}

bool PerturbedAdjacency::symmetric() const {
  for (std::size_t i = 0; i < n_; ++i) {
    if (cells_[i * n_ + i] != 0) return false;
    for (std::size_t j = i + 1; j < n_; ++j)
      if (cells_[i * n_ + j] != cells_[j * n_ + i]) return false;
  }
  return true;
}

std::vector<double> label_only_feature(int label_u, int label_v, std::size_t num_classes) {
  const int c = static_cast<int>(num_classes);
  if (label_u < 0 || label_u >= c || label_v < 0 || label_v >= c) {
    throw std::out_of_range("label outside [0, " + std::to_string(num_classes) + ")");
  }
  std::vector<double> out(num_classes, 0.0);
  out[static_cast<std::size_t>(label_u)] += 1.0;
  out[static_cast<std::size_t>(label_v)] += 1.0;
  return out;
}

double edge_rand_flip_probability(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("privacy budget epsilon must be positive");
  return 2.0 / (std::exp(epsilon) + 1.0);
}

PerturbedAdjacency edge_rand(const PerturbedAdjacency& adj, double epsilon, std::uint64_t seed) {
  const double s = edge_rand_flip_probability(epsilon);
  Rng rng = make_rng(seed, "edge-rand");
  std::bernoulli_distribution flip(s);
  PerturbedAdjacency out = adj;
  for (std::size_t i = 0; i < adj.size(); ++i)
    for (std::size_t j = i + 1; j < adj.size(); ++j)
      if (flip(rng)) out.set(i, j, !adj(i, j));
  return out;
}

LapGraphResult lap_graph(const PerturbedAdjacency& adj, double epsilon, double budget_split, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("privacy budget epsilon must be positive");
  if (!(budget_split > 0.0 && budget_split < 1.0)) throw std::invalid_argument("budget split must lie in (0, 1)");
  const double eps_count = budget_split * epsilon;
  const double eps_cells = epsilon - eps_count;
  const std::size_t n = adj.size();
  const std::size_t cells = n * (n - (n > 0 ? 1 : 0)) / 2;

  Rng rng = make_rng(seed, "lap-graph");
  const double noisy_count = static_cast<double>(adj.num_edges()) + sample_laplace(rng, 1.0 / eps_count);
  const double clamped = std::clamp(std::round(noisy_count), 0.0, static_cast<double>(cells));
  const auto keep = static_cast<std::size_t>(clamped);

  std::vector<double> noisy(cells);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) noisy[k++] = (adj(i, j) ? 1.0 : 0.0) + sample_laplace(rng, 1.0 / eps_cells);

  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto larger = [&](std::size_t a, std::size_t b) { return noisy[a] != noisy[b] ? noisy[a] > noisy[b] : a < b; };
  if (keep < cells) std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), larger);
  std::vector<bool> chosen(cells, false);
  for (std::size_t r = 0; r < keep; ++r) chosen[order[r]] = true;

  LapGraphResult out{PerturbedAdjacency(n), keep};
  k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (chosen[k++]) out.adjacency.set(i, j, true);
  return out;
}

Graph perturb_graph(const Graph& g, const DefenseConfig& defense, std::uint64_t seed) {
  defense.validate();
  const PerturbedAdjacency adj = PerturbedAdjacency::from_graph(g);
  switch (defense.kind) {
    case DefenseKind::EdgeRand: return g.with_edges(edge_rand(adj, defense.epsilon, seed).edges());
    case DefenseKind::LapGraph:
      return g.with_edges(lap_graph(adj, defense.epsilon, defense.budget_split, seed).adjacency.edges());
    default: return g;
  }
}

DefendedResponse apply_defended_query(const TrainedGnn& model, const Subgraph& sub, const DefenseConfig& defense) {
  switch (defense.kind) {
    case DefenseKind::LabelOnly: {
      DefendedResponse out{std::vector<double>(model.num_classes, 0.0), true};
      out.values[static_cast<std::size_t>(predict_label(model, sub))] = 1.0;
      return out;
    }
    case DefenseKind::SoftPosterior: return {khop_query(model, sub, defense.temperature).values, false};
    default: return {khop_query(model, sub).values, false};
  }
}

std::vector<double> defended_pair_feature(const DefendedResponse& u, const DefendedResponse& v, PairwiseOpSet ops) {
  if (u.label_only != v.label_only) throw std::invalid_argument("mixed label-only and posterior responses");
  if (u.values.size() != v.values.size()) throw ShapeError("defended responses differ in length");
  if (!u.label_only) return pairwise_ops(u.values, v.values, ops);
  std::vector<double> out(u.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u.values[i] + v.values[i];
  return out;
}

}  // namespace linksteal
