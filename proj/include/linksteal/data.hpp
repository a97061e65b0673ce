#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "linksteal/graph.hpp"

namespace linksteal {

/// Which graph a pair dataset was drawn from. Attack training data must come
/// from the shadow side and attack test data from the target side.
enum class PairSource { Unspecified, ShadowTrain, TargetTrain };

std::string_view to_string(PairSource source);

struct LabeledPair {
  NodeId u = 0;
  NodeId v = 0;
  int label = 0;

  Edge edge() const { return Edge(u, v); }
};

struct PairDataset {
  std::vector<LabeledPair> pairs;
  PairSource source = PairSource::Unspecified;
  std::size_t num_nodes = 0;

  std::size_t positives() const;
  std::size_t negatives() const { return pairs.size() - positives(); }
};

/// Target/shadow halves of one dataset, each split 8:2 into train and test.
/// Every graph is induced on its node set; `*_ids` map local ids back to the
/// source graph.
struct SplitBundle {
  Graph target_train;
  Graph target_test;
  Graph shadow_train;
  Graph shadow_test;
  std::vector<NodeId> target_train_ids;
  std::vector<NodeId> target_test_ids;
  std::vector<NodeId> shadow_train_ids;
  std::vector<NodeId> shadow_test_ids;
};

/// Uniform node halving (target first), then an 8:2 train/test split inside
/// each half. `shadow_fraction` < 1 keeps a uniform subset of the shadow half
/// before its split. Edges crossing split boundaries are dropped.
SplitBundle make_splits(const Graph& g, std::uint64_t seed, double shadow_fraction = 1.0);

/// Uniform node subsample with induced edges.
Graph subsample_nodes(const Graph& g, double fraction, std::uint64_t seed,
                      std::vector<NodeId>* kept = nullptr);

/// Every edge of `g` as a positive pair plus the same number of non-edges
/// drawn uniformly without replacement, shuffled.
PairDataset build_pair_dataset(const Graph& g, std::uint64_t seed, PairSource source = PairSource::Unspecified);

/// Throws std::logic_error unless `train` came from a shadow training graph
/// and `test` from a target training graph.
void check_attack_provenance(const PairDataset& train, const PairDataset& test);

struct PlantedPartitionParams {
  std::size_t nodes = 400;
  std::size_t communities = 4;
  double p_in = 0.1;
  double p_out = 0.005;
  std::size_t feature_dim = 32;
  /// Standard deviation of the Gaussian added to each community centroid
  /// (centroid entries are standard normal).
  double noise = 1.0;

  friend bool operator==(const PlantedPartitionParams&, const PlantedPartitionParams&) = default;
};

/// Community-labelled random graph: node i belongs to community
/// i * communities / nodes, intra-community pairs link with p_in, the rest with p_out.
Graph generate_planted_partition(const PlantedPartitionParams& params, std::uint64_t seed);

/// One "<split>\t<source id>" line per node, splits in bundle order.
void write_split_manifest(const std::filesystem::path& path, const SplitBundle& splits);
/// Rebuilds a bundle from a manifest and the source graph.
SplitBundle read_split_manifest(const std::filesystem::path& path, const Graph& g);

}  // namespace linksteal
