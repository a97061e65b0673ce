#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "linksteal/autograd.hpp"
#include "linksteal/data.hpp"
#include "linksteal/defense.hpp"
#include "linksteal/gnn.hpp"
#include "linksteal/graph.hpp"

namespace linksteal {

enum class AttackId { B0, B1, B2, A0, A1, A2, A3, A4, A5, A6, A7, A8, A9 };

/// Which knowledge an attack uses. hop is -1 for the baselines, which never
/// query the model.
struct AttackSpec {
  AttackId id = AttackId::A0;
  std::string_view name;
  std::string_view title;
  int hop = -1;
  bool posteriors = false;
  bool node_attrs = false;
  bool graph_feats = false;
};

/// Baselines 0-2 followed by attacks 0-9.
std::span<const AttackSpec> attack_table();
const AttackSpec& attack_spec(AttackId id);
/// Accepts b0..b2 and a0..a9.
AttackId parse_attack_id(std::string_view name);
/// Comma-separated ids, or "all".
std::vector<AttackId> parse_attack_list(std::string_view text);

enum class InputKind { Posterior, NodeAttr, Graph };

std::string_view to_string(InputKind kind);

/// Per-pair attack inputs, one matrix per input kind (rows aligned with pairs).
/// Kinds the attack does not use stay empty.
struct AttackInputs {
  Tensor posterior;
  Tensor node_attr;
  Tensor graph;
  /// The posterior block holds label_only_feature rows rather than pairwise ops.
  bool label_only = false;

  const Tensor& get(InputKind kind) const;
  Tensor& get(InputKind kind);
  std::size_t rows() const;
  std::vector<InputKind> kinds() const;
  /// Row `r` of every populated matrix.
  AttackInputs row(std::size_t r) const;
};

/// How posteriors turn into attack inputs.
enum class PosteriorMode { Pairwise, Transfer };

struct FeatureOptions {
  DefenseConfig defense;
  PosteriorMode mode = PosteriorMode::Pairwise;
  /// Operations combining the two posteriors in Pairwise mode.
  PairwiseOpSet pairwise_ops = kAllPairwiseOps;
};

/// Inputs for one pair (u, v) of `g` as the adversary sees it: queries and
/// proximity measures exclude the u-v edge.
AttackInputs assemble_features(const AttackSpec& spec, const TrainedGnn* model, const Graph& g, NodeId u, NodeId v,
                               const FeatureOptions& options = {});

/// Batched assemble_features over a fixed pair list. Per-hop query results
/// and the structural blocks are computed once and shared between attacks.
class PairFeatureBuilder {
 public:
  PairFeatureBuilder(const TrainedGnn* model, const Graph& g, std::span<const LabeledPair> pairs,
                     FeatureOptions options = {});

  AttackInputs assemble(const AttackSpec& spec);
  /// Query responses (posterior or one-hot label) for both endpoints of every pair.
  const std::vector<std::pair<DefendedResponse, DefendedResponse>>& responses(int hop);

 private:
  const TrainedGnn* model_;
  const Graph& source_;
  std::vector<LabeledPair> pairs_;
  FeatureOptions options_;
  std::map<int, std::vector<std::pair<DefendedResponse, DefendedResponse>>> responses_;
  std::map<int, Tensor> posterior_;
  std::optional<Tensor> node_attr_;
  std::optional<Tensor> proximity_;
};

/// Layer widths of one sub-network; every layer is Linear -> ReLU -> dropout.
struct BranchLayout {
  InputKind input = InputKind::Posterior;
  std::vector<std::size_t> widths;
};

/// Sub-networks of `id`. `depth` (2-5 total linear layers including the
/// output layer) resizes the posterior-only attacks; 0 keeps the default.
std::vector<BranchLayout> attack_architecture(AttackId id, std::size_t depth = 0);

struct MlpBranch {
  InputKind input = InputKind::Posterior;
  std::size_t in_dim = 0;
  std::vector<std::size_t> widths;
  /// Weight and bias per layer.
  std::vector<Parameter> params;
};

/// Sub-networks whose embeddings are concatenated into a 2-way linear head.
struct MultiInputMlp {
  AttackId attack = AttackId::A0;
  std::vector<MlpBranch> branches;
  Parameter head_weight;
  Parameter head_bias;
  double dropout = 0.5;

  std::vector<Parameter*> parameters();
  std::size_t embedding_dim() const;
  /// Training-mode forward pass recorded on `tape`.
  Var forward(Tape& tape, const AttackInputs& inputs, bool training, Rng& rng);
  /// Inference logits, one row per pair.
  Tensor logits(const AttackInputs& inputs) const;
};

MultiInputMlp init_attack_model(AttackId id, const AttackInputs& shapes, std::size_t depth, Rng& rng);

struct AttackTrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.001;
  double dropout = 0.5;
  std::size_t depth = 0;
};

/// Full-batch cross-entropy training with Adam and cosine annealing.
MultiInputMlp train_attack(const AttackSpec& spec, const AttackInputs& inputs, std::span<const int> labels,
                           std::uint64_t seed, const AttackTrainConfig& config = {});

struct LinkVerdict {
  double score = 0.0;
  bool decision = false;
};

/// Softmax over two logits; score is the probability of a link.
LinkVerdict verdict_from_logits(double no_link, double link);
/// Verdict for a single-row input.
LinkVerdict infer_link(const MultiInputMlp& model, const AttackInputs& inputs);
/// Link probability for every row.
std::vector<double> score_pairs(const MultiInputMlp& model, const AttackInputs& inputs);

/// u,v,label,score per pair.
void write_scores_csv(const std::filesystem::path& path, std::span<const LabeledPair> pairs,
                      std::span<const double> scores);
/// u,v,label followed by every populated block under named columns.
void write_features_csv(const std::filesystem::path& path, std::span<const LabeledPair> pairs,
                        const AttackInputs& inputs, PosteriorMode mode = PosteriorMode::Pairwise,
                        PairwiseOpSet ops = kAllPairwiseOps);

}  // namespace linksteal
