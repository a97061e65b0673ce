#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "linksteal/attack.hpp"
#include "linksteal/data.hpp"
#include "linksteal/defense.hpp"
#include "linksteal/gnn.hpp"
#include "linksteal/metrics.hpp"

namespace linksteal {

/// A dataset directory, or the planted-partition generator when `path` is empty.
struct DatasetSource {
  std::filesystem::path path;
  PlantedPartitionParams synthetic;
  std::uint64_t data_seed = 7;

  bool is_synthetic() const { return path.empty(); }
  friend bool operator==(const DatasetSource&, const DatasetSource&) = default;
};

Graph load_source(const DatasetSource& source);

struct ExperimentConfig {
  DatasetSource dataset;
  /// Second dataset for the transfer setting; unused elsewhere.
  DatasetSource shadow_dataset;
  GnnKind target_arch = GnnKind::Sage;
  GnnKind shadow_arch = GnnKind::Sage;
  std::vector<AttackId> attacks;
  /// Query depths to keep; attacks at other depths are skipped.
  std::vector<int> hops{0, 1, 2};
  DefenseConfig defense;
  PairwiseOpSet pairwise_ops = kAllPairwiseOps;
  std::vector<double> epsilons{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double shadow_fraction = 1.0;
  std::size_t runs = 5;
  std::uint64_t seed = 0;
  GnnConfig gnn;
  AttackTrainConfig attack_training;
  /// Permutes attack labels in both pair sets (no-signal control).
  bool shuffle_labels = false;
  /// Split manifests, checkpoints and per-pair scores go here when set.
  std::filesystem::path artifacts;

  ExperimentConfig();
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  /// Attacks kept after the hop filter, in table order.
  std::vector<AttackId> active_attacks() const;
};

/// Sets one key of the flat key=value format. Unknown keys throw.
void apply_config_entry(ExperimentConfig& cfg, std::string_view key, std::string_view value);
/// Reads "key = value" lines; '#' starts a comment, list values are comma-separated.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every key with its current value, loadable by load_config.
std::string config_to_text(const ExperimentConfig& cfg);

/// Error raised inside a pipeline stage, tagged with the stage and run.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, std::size_t run, const std::string& what);
  const std::string& stage() const { return stage_; }
  std::size_t run() const { return run_; }

 private:
  std::string stage_;
  std::size_t run_;
};

struct RunReport {
  std::vector<AttackId> attacks;
  /// auc[a][r]: AUC of attacks[a] in run r.
  std::vector<std::vector<double>> auc;
  std::vector<double> target_accuracy;
  std::vector<double> shadow_accuracy;
  /// Wall-clock seconds per run; not part of the CSV output.
  std::vector<double> seconds;

  std::size_t runs() const { return target_accuracy.size(); }
  double mean_auc(AttackId id) const;
  double mean_target_accuracy() const;
  double mean_shadow_accuracy() const;
};

/// Shadow-model attack pipeline over cfg.runs seeded runs (seed + r).
RunReport run_experiment(const ExperimentConfig& cfg);

/// Shadow side trained on `shadow_cfg`'s dataset; posterior inputs use the
/// class-count independent transfer features. Reports one posterior-only
/// attack per configured hop. When both datasets are the same, the shadow
/// side is the disjoint shadow half of the usual split.
RunReport run_transfer(const ExperimentConfig& target_cfg, const ExperimentConfig& shadow_cfg);

struct SweepRow {
  double epsilon = 0.0;
  double target_accuracy = 0.0;
  double attack_auc = 0.0;
  /// Mean edge count of the perturbed target training graphs.
  double perturbed_edges = 0.0;
  /// LapGraph only: runs whose output edge count differed from the estimate.
  std::size_t estimate_mismatches = 0;
};

struct SweepReport {
  DefenseKind kind = DefenseKind::EdgeRand;
  AttackId attack = AttackId::A1;
  double reference_accuracy = 0.0;
  double reference_auc = 0.0;
  std::vector<SweepRow> rows;
};

/// Per epsilon: perturb both training graphs, retrain, rerun Attack-1.
/// The reference row is the same pipeline without perturbation.
SweepReport run_defense_sweep(const ExperimentConfig& cfg, const std::vector<double>& epsilons);

struct PccRow {
  AttackId attack = AttackId::A0;
  std::string metric;
  double pcc = 0.0;
};

struct SurprisingRow {
  AttackId attack = AttackId::A0;
  AttackId baseline = AttackId::B0;
  std::string metric;
  SurprisingLinks value;
};

struct CdfRow {
  int hop = 0;
  CdfPoint point;
};

struct AnalysisReport {
  std::vector<std::pair<AttackId, GroupReport>> groups;
  std::vector<PccRow> pcc;
  std::vector<SurprisingRow> surprising;
  std::vector<CdfRow> cdf;
};

/// Robustness groups, correlations, surprising links and leading-probability
/// CDFs for the first run of `cfg`.
AnalysisReport run_analysis(const ExperimentConfig& cfg);

void write_run_report(const std::filesystem::path& dir, const RunReport& report);
void write_sweep_report(const std::filesystem::path& dir, const SweepReport& report);
void write_analysis_report(const std::filesystem::path& dir, const AnalysisReport& report);

}  // namespace linksteal
