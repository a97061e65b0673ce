#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linksteal/gnn.hpp"
#include "linksteal/graph.hpp"

namespace linksteal {

enum class BlockKind { Posterior, NodeAttr, Graph, Transfer };

std::string_view to_string(BlockKind kind);

struct FeatureBlock {
  BlockKind kind = BlockKind::Posterior;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// Number of pairwise operations, in output order: Hadamard, average,
/// absolute difference, squared difference.
inline constexpr std::size_t kPairwiseOps = 4;
inline constexpr std::size_t kGraphFeatures = 3;
inline constexpr std::size_t kTransferFeatures = 7;

/// Bit set over the pairwise operations; bit i selects operation i.
using PairwiseOpSet = unsigned;
inline constexpr PairwiseOpSet kAllPairwiseOps = (1u << kPairwiseOps) - 1;

/// Comma-separated subset of hadamard, avg, l1, l2, or "all".
PairwiseOpSet parse_pairwise_ops(std::string_view text);
std::string pairwise_ops_to_string(PairwiseOpSet ops);

/// Order-symmetric combinations of `a` and `b` selected by `ops`, concatenated
/// in operation order.
std::vector<double> pairwise_ops(std::span<const double> a, std::span<const double> b,
                                 PairwiseOpSet ops = kAllPairwiseOps);

/// What an adversary sees for a pair at a given query depth: each endpoint's
/// k-hop subgraph with the pair's own edge removed.
struct QueryContext {
  int hop = 0;
  Subgraph u_view;
  Subgraph v_view;
};

QueryContext make_query_context(const Graph& g, NodeId u, NodeId v, int hop);

/// pairwise_ops over two posterior-like vectors.
FeatureBlock posterior_block(std::span<const double> post_u, std::span<const double> post_v);
/// Queries both endpoints at ctx.hop and combines their posteriors.
FeatureBlock posterior_block(const TrainedGnn& model, const QueryContext& ctx, double temperature = 1.0);

/// Elementwise product of the two attribute rows.
FeatureBlock node_attr_block(std::span<const double> features_u, std::span<const double> features_v);

/// [common neighbours, Jaccard, preferential attachment] over the 1-hop
/// neighbourhoods of u and v in `g`, ignoring the edge between them.
/// Throws for hop 0, where the adversary has no structural knowledge.
FeatureBlock graph_block(const Graph& g, NodeId u, NodeId v, int hop);
/// Same measures read off the context's subgraphs.
FeatureBlock graph_block(const QueryContext& ctx);

/// Class-count independent summary of two posteriors: pairwise ops over their
/// entropies, then cosine similarity, Jensen-Shannon divergence and
/// correlation distance of the vectors.
FeatureBlock transfer_block(std::span<const double> post_u, std::span<const double> post_v);

/// Natural-log entropy. Throws unless `p` is a probability vector.
double entropy(std::span<const double> p);
/// Zero-pads the shorter vector; natural log.
double jensen_shannon(std::span<const double> p, std::span<const double> q);
/// 0 when either vector is all zeros.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
/// 1 - Pearson r; 0 when either vector is constant.
double correlation_distance(std::span<const double> a, std::span<const double> b);
/// Throws std::invalid_argument unless entries are >= 0 and sum to 1.
void require_distribution(std::span<const double> p, const char* what);

/// Column names for a block of `kind` and width `size`, e.g. "post_avg_2".
/// Posterior blocks are named after the operations in `ops`.
std::vector<std::string> block_header(BlockKind kind, std::size_t size, PairwiseOpSet ops = kAllPairwiseOps);

}  // namespace linksteal
