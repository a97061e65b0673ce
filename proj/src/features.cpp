#include "linksteal/features.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace linksteal {

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Posterior: return "posterior";
    case BlockKind::NodeAttr: return "node_attr";
    case BlockKind::Graph: return "graph";
    case BlockKind::Transfer: return "transfer";
  }
  return "unknown";
}

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": length mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
}

struct Proximity {
  double common = 0;
  double jaccard = 0;
  double preferential = 0;
};

// Both inputs sorted ascending.
Proximity proximity(const std::vector<NodeId>& nu, const std::vector<NodeId>& nv) {
  std::vector<NodeId> both;
  std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(both));
  const double common = static_cast<double>(both.size());
  const double united = static_cast<double>(nu.size() + nv.size()) - common;
  return {common, united > 0 ? common / united : 0.0,
          static_cast<double>(nu.size()) * static_cast<double>(nv.size())};
}

std::vector<NodeId> visible_neighbors(const Graph& g, NodeId x, NodeId other) {
  std::vector<NodeId> out;
  for (NodeId w : g.adjacency(x))
    if (w != other && w != x) out.push_back(w);
  return out;
}

std::vector<NodeId> center_neighbors(const Subgraph& sub) {
  std::vector<NodeId> out;
  for (const Edge& e : sub.edges) {
    if (e.is_self_loop()) continue;
    if (e.u == sub.center) out.push_back(e.v);
    else if (e.v == sub.center) out.push_back(e.u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

constexpr const char* kPairwiseOpNames[kPairwiseOps] = {"hadamard", "avg", "l1", "l2"};

PairwiseOpSet parse_pairwise_ops(std::string_view text) {
  PairwiseOpSet ops = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string_view item = text.substr(start, comma - start);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    start = comma + 1;
    if (item.empty()) continue;
    if (item == "all") {
      ops |= kAllPairwiseOps;
      continue;
    }
    const auto* found = std::find(std::begin(kPairwiseOpNames), std::end(kPairwiseOpNames), item);
    if (found == std::end(kPairwiseOpNames)) {
      throw std::invalid_argument("unknown pairwise operation '" + std::string(item) + "'");
    }
    ops |= 1u << (found - std::begin(kPairwiseOpNames));
  }
  if (ops == 0) throw std::invalid_argument("no pairwise operation selected");
  return ops;
}

std::string pairwise_ops_to_string(PairwiseOpSet ops) {
  if (ops == kAllPairwiseOps) return "all";
  std::string out;
  for (std::size_t op = 0; op < kPairwiseOps; ++op)
    if (ops & (1u << op)) out += (out.empty() ? "" : ",") + std::string(kPairwiseOpNames[op]);
  return out;
}

std::vector<double> pairwise_ops(std::span<const double> a, std::span<const double> b, PairwiseOpSet ops) {
  require_same_length(a, b, "pairwise_ops");
  if (ops == 0 || ops > kAllPairwiseOps) throw std::invalid_argument("invalid pairwise operation set");
  const std::size_t n = a.size();
  std::vector<double> out;
  out.reserve(kPairwiseOps * n);
  for (std::size_t op = 0; op < kPairwiseOps; ++op) {
    if (!(ops & (1u << op))) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = std::abs(a[i] - b[i]);
      switch (op) {
        case 0: out.push_back(a[i] * b[i]); break;
        case 1: out.push_back((a[i] + b[i]) / 2.0); break;
        case 2: out.push_back(diff); break;
        default: out.push_back(diff * diff); break;
      }
    }
  }
  return out;
}

QueryContext make_query_context(const Graph& g, NodeId u, NodeId v, int hop) {
  const Edge pair(u, v);
  return QueryContext{hop, khop_subgraph(g, u, hop, pair), khop_subgraph(g, v, hop, pair)};
}

FeatureBlock posterior_block(std::span<const double> post_u, std::span<const double> post_v) {
  return {BlockKind::Posterior, pairwise_ops(post_u, post_v)};
}

FeatureBlock posterior_block(const TrainedGnn& model, const QueryContext& ctx, double temperature) {
  const Posterior pu = khop_query(model, ctx.u_view, temperature);
  const Posterior pv = khop_query(model, ctx.v_view, temperature);
  return posterior_block(pu.values, pv.values);
}

FeatureBlock node_attr_block(std::span<const double> features_u, std::span<const double> features_v) {
  require_same_length(features_u, features_v, "node_attr_block");
  FeatureBlock out{BlockKind::NodeAttr, std::vector<double>(features_u.size())};
  for (std::size_t i = 0; i < features_u.size(); ++i) out.values[i] = features_u[i] * features_v[i];
  return out;
}

FeatureBlock graph_block(const Graph& g, NodeId u, NodeId v, int hop) {
  if (hop < 1) throw std::invalid_argument("graph features need a 1-hop or 2-hop query");
  g.check_node(u);
  g.check_node(v);
  const Proximity p = proximity(visible_neighbors(g, u, v), visible_neighbors(g, v, u));
  return {BlockKind::Graph, {p.common, p.jaccard, p.preferential}};
}

FeatureBlock graph_block(const QueryContext& ctx) {
  if (ctx.hop < 1) throw std::invalid_argument("graph features need a 1-hop or 2-hop query");
  const Proximity p = proximity(center_neighbors(ctx.u_view), center_neighbors(ctx.v_view));
  return {BlockKind::Graph, {p.common, p.jaccard, p.preferential}};
}

void require_distribution(std::span<const double> p, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string(what) + ": empty distribution");
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": negative or non-finite entry");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw std::invalid_argument(std::string(what) + ": entries sum to " + std::to_string(total));
  }
}

double entropy(std::span<const double> p) {
  require_distribution(p, "entropy");
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  const std::size_t n = std::max(p.size(), q.size());
  double js = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    const double m = (a + b) / 2.0;
    const double ta = a > 0.0 ? a * std::log(a / m) : 0.0;
    const double tb = b > 0.0 ? b * std::log(b / m) : 0.0;
    js += (ta + tb) / 2.0;
  }
  return std::max(js, 0.0);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "cosine_similarity");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

double correlation_distance(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "correlation_distance");
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return 1.0 - cov / std::sqrt(va * vb);
}

FeatureBlock transfer_block(std::span<const double> post_u, std::span<const double> post_v) {
  const double eu = entropy(post_u);
  const double ev = entropy(post_v);
  const std::vector<double> ent = pairwise_ops(std::span<const double>(&eu, 1), std::span<const double>(&ev, 1));

  const std::size_t n = std::max(post_u.size(), post_v.size());
  std::vector<double> pu(post_u.begin(), post_u.end());
  std::vector<double> pv(post_v.begin(), post_v.end());
  pu.resize(n, 0.0);
  pv.resize(n, 0.0);

  FeatureBlock out{BlockKind::Transfer, ent};
  out.values.push_back(cosine_similarity(pu, pv));
  out.values.push_back(jensen_shannon(pu, pv));
  out.values.push_back(correlation_distance(pu, pv));
  return out;
}

std::vector<std::string> block_header(BlockKind kind, std::size_t size, PairwiseOpSet ops) {
  std::vector<std::string> out;
  out.reserve(size);
  switch (kind) {
    case BlockKind::Posterior: {
      const std::size_t selected = static_cast<std::size_t>(std::popcount(ops & kAllPairwiseOps));
      const std::size_t width = selected == 0 ? 0 : size / selected;
      for (std::size_t op = 0; op < kPairwiseOps; ++op) {
        if (!(ops & (1u << op))) continue;
        for (std::size_t i = 0; i < width; ++i)
          out.push_back("post_" + std::string(kPairwiseOpNames[op]) + "_" + std::to_string(i));
      }
      for (std::size_t i = out.size(); i < size; ++i) out.push_back("post_" + std::to_string(i));
      break;
    }
    case BlockKind::NodeAttr:
      for (std::size_t i = 0; i < size; ++i) out.push_back("attr_hadamard_" + std::to_string(i));
      break;
    case BlockKind::Graph: {
      static constexpr const char* kNames[kGraphFeatures] = {"graph_cn", "graph_jaccard", "graph_pa"};
      for (std::size_t i = 0; i < size; ++i) out.push_back(i < kGraphFeatures ? kNames[i] : "graph_" + std::to_string(i));
      break;
    }
    case BlockKind::Transfer: {
      static constexpr const char* kNames[kTransferFeatures] = {
          "entropy_hadamard", "entropy_avg", "entropy_l1", "entropy_l2", "cosine", "jsd", "correlation_distance"};
      for (std::size_t i = 0; i < size; ++i)
        out.push_back(i < kTransferFeatures ? kNames[i] : "transfer_" + std::to_string(i));
      break;
    }
  }
  return out;
}

}  // namespace linksteal
