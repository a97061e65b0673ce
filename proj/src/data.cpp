#include "linksteal/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "linksteal/rng.hpp"

namespace linksteal {

std::string_view to_string(PairSource source) {
  switch (source) {
    case PairSource::Unspecified: return "unspecified";
    case PairSource::ShadowTrain: return "shadow_train";
    case PairSource::TargetTrain: return "target_train";
  }
  return "unknown";
}

std::size_t PairDataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [](const LabeledPair& p) { return p.label == 1; }));
}

namespace {

std::size_t train_count(std::size_t m) { return static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(m))); }

}  // namespace

SplitBundle make_splits(const Graph& g, std::uint64_t seed, double shadow_fraction) {
  if (g.num_nodes() < 4) throw std::invalid_argument("make_splits needs at least 4 nodes");
  if (g.num_classes() < 1) throw std::invalid_argument("make_splits needs labelled nodes");
  if (!(shadow_fraction > 0.0 && shadow_fraction <= 1.0)) {
    throw std::invalid_argument("shadow fraction must lie in (0, 1]");
  }
  Rng rng = make_rng(seed, "split");
  std::vector<NodeId> perm(g.num_nodes());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  const std::size_t half = g.num_nodes() / 2;
  std::vector<NodeId> target(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<NodeId> shadow(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end());
  if (shadow_fraction < 1.0) {
    Rng sub = make_rng(seed, "shadow-subsample");
    std::shuffle(shadow.begin(), shadow.end(), sub);
    auto keep = static_cast<std::size_t>(std::llround(shadow_fraction * static_cast<double>(shadow.size())));
    shadow.resize(std::max<std::size_t>(keep, 2));
  }

  SplitBundle out;
  auto split = [&](const std::vector<NodeId>& nodes, std::vector<NodeId>& train, std::vector<NodeId>& test) {
    const std::size_t k = train_count(nodes.size());
    train.assign(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(k));
    test.assign(nodes.begin() + static_cast<std::ptrdiff_t>(k), nodes.end());
  };
  split(target, out.target_train_ids, out.target_test_ids);
  split(shadow, out.shadow_train_ids, out.shadow_test_ids);
  out.target_train = induced_subgraph(g, out.target_train_ids);
  out.target_test = induced_subgraph(g, out.target_test_ids);
  out.shadow_train = induced_subgraph(g, out.shadow_train_ids);
  out.shadow_test = induced_subgraph(g, out.shadow_test_ids);
  return out;
}

Graph subsample_nodes(const Graph& g, double fraction, std::uint64_t seed, std::vector<NodeId>* kept) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("subsample fraction must lie in (0, 1]");
  Rng rng = make_rng(seed, "subsample");
  std::vector<NodeId> nodes(g.num_nodes());
  std::iota(nodes.begin(), nodes.end(), 0);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  nodes.resize(static_cast<std::size_t>(std::llround(fraction * static_cast<double>(g.num_nodes()))));
  std::sort(nodes.begin(), nodes.end());
  if (kept != nullptr) *kept = nodes;
  return induced_subgraph(g, nodes);
}

PairDataset build_pair_dataset(const Graph& g, std::uint64_t seed, PairSource source) {
  std::vector<Edge> positives;
  for (const Edge& e : g.edges())
    if (!e.is_self_loop()) positives.push_back(e);
  if (positives.empty()) throw std::invalid_argument("build_pair_dataset: graph has no edges");
  const std::size_t n = g.num_nodes();
  const std::size_t all_pairs = n * (n - 1) / 2;
  const std::size_t non_edges = all_pairs - positives.size();
  if (non_edges < positives.size()) {
    throw std::invalid_argument("build_pair_dataset: graph too dense (" + std::to_string(non_edges) +
                                " non-edges for " + std::to_string(positives.size()) + " edges)");
  }

  Rng rng = make_rng(seed, "negative-sample");
  std::vector<Edge> negatives;
  negatives.reserve(positives.size());
  if (non_edges <= 4 * positives.size()) {
    std::vector<Edge> pool;
    pool.reserve(non_edges);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v)
        if (!g.has_edge(static_cast<NodeId>(u), static_cast<NodeId>(v)))
          pool.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    for (std::size_t i = 0; i < positives.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      negatives.push_back(pool[i]);
    }
  } else {
    std::unordered_set<std::uint64_t> chosen;
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
    while (negatives.size() < positives.size()) {
      const NodeId a = node(rng);
      const NodeId b = node(rng);
      if (a == b || g.has_edge(a, b)) continue;
      const Edge e(a, b);
      const auto key = (static_cast<std::uint64_t>(e.u) << 32) | static_cast<std::uint32_t>(e.v);
      if (!chosen.insert(key).second) continue;
      negatives.push_back(e);
    }
  }

  PairDataset out;
  out.source = source;
  out.num_nodes = n;
  out.pairs.reserve(2 * positives.size());
  for (const Edge& e : positives) out.pairs.push_back({e.u, e.v, 1});
  for (const Edge& e : negatives) out.pairs.push_back({e.u, e.v, 0});
  std::shuffle(out.pairs.begin(), out.pairs.end(), rng);
  return out;
}

void check_attack_provenance(const PairDataset& train, const PairDataset& test) {
  if (train.source != PairSource::ShadowTrain) {
    throw std::logic_error("attack training pairs must come from the shadow training graph, got " +
                           std::string(to_string(train.source)));
  }
  if (test.source != PairSource::TargetTrain) {
    throw std::logic_error("attack test pairs must come from the target training graph, got " +
                           std::string(to_string(test.source)));
  }
}

Graph generate_planted_partition(const PlantedPartitionParams& params, std::uint64_t seed) {
  if (params.communities < 2) throw std::invalid_argument("planted partition needs at least 2 communities");
  if (params.nodes < params.communities) throw std::invalid_argument("fewer nodes than communities");
  auto valid_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!valid_prob(params.p_in) || !valid_prob(params.p_out) || !(params.p_in > params.p_out)) {
    throw std::invalid_argument("planted partition needs 0 <= p_out < p_in <= 1");
  }
  if (params.feature_dim == 0) throw std::invalid_argument("feature dimension must be positive");
  if (!(params.noise >= 0.0)) throw std::invalid_argument("noise must be non-negative");

  const std::size_t n = params.nodes;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i * params.communities / n);

  Rng edge_rng = make_rng(seed, "planted-edges");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? params.p_in : params.p_out;
      if (uni(edge_rng) < p) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  }

  Rng feat_rng = make_rng(seed, "planted-features");
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor centroids(params.communities, params.feature_dim);
  for (double& x : centroids.data()) x = normal(feat_rng);
  Tensor features(n, params.feature_dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto c = centroids.row(static_cast<std::size_t>(labels[i]));
    auto row = features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double z = normal(feat_rng);
      row[j] = c[j] + params.noise * z;
    }
  }
  return Graph(n, std::move(edges), std::move(features), std::move(labels), params.communities);
}

void write_split_manifest(const std::filesystem::path& path, const SplitBundle& splits) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write split manifest " + path.string());
  auto dump = [&](std::string_view name, const std::vector<NodeId>& ids) {
    for (NodeId id : ids) out << name << '\t' << id << '\n';
  };
  dump("target_train", splits.target_train_ids);
  dump("target_test", splits.target_test_ids);
  dump("shadow_train", splits.shadow_train_ids);
  dump("shadow_test", splits.shadow_test_ids);
}

SplitBundle read_split_manifest(const std::filesystem::path& path, const Graph& g) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read split manifest " + path.string());
  SplitBundle out;
  std::string line;
  std::unordered_set<NodeId> seen;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string name;
    NodeId id = 0;
    if (!(ss >> name >> id)) throw std::runtime_error("malformed manifest line: " + line);
    g.check_node(id);
    if (!seen.insert(id).second) throw std::runtime_error("node listed twice in manifest: " + std::to_string(id));
    if (name == "target_train") out.target_train_ids.push_back(id);
    else if (name == "target_test") out.target_test_ids.push_back(id);
    else if (name == "shadow_train") out.shadow_train_ids.push_back(id);
    else if (name == "shadow_test") out.shadow_test_ids.push_back(id);
    else throw std::runtime_error("unknown split name in manifest: " + name);
  }
  out.target_train = induced_subgraph(g, out.target_train_ids);
  out.target_test = induced_subgraph(g, out.target_test_ids);
  out.shadow_train = induced_subgraph(g, out.shadow_train_ids);
  out.shadow_test = induced_subgraph(g, out.shadow_test_ids);
  return out;
}

}  // namespace linksteal
