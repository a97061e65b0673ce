#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace linksteal {

/// Rank-based (Mann-Whitney) area under the ROC curve; tied scores count
/// one half. Throws unless both labels occur.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Fraction of positions where prediction and label agree.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

inline constexpr std::size_t kRobustnessGroups = 10;

struct GroupReport {
  std::string metric;
  /// Group AUCs, highest-metric group first.
  std::vector<double> group_auc;
  std::vector<std::size_t> group_size;
  /// Largest and smallest metric value inside each group.
  std::vector<double> metric_high;
  std::vector<double> metric_low;
  /// Indices into the positives for every group, in sorted order.
  std::vector<std::vector<std::size_t>> members;
};

/// Sorts positives by metric descending (ties by index), cuts them into ten
/// contiguous groups whose sizes differ by at most one (larger groups first),
/// and scores each group against every negative.
GroupReport robustness_groups(std::string metric, std::span<const double> positive_scores,
                              std::span<const double> positive_metric, std::span<const double> negative_scores);

/// Sample Pearson correlation; 0 for fewer than two points or a constant side.
double pearson_correlation(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of average ranks.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

struct SurprisingLinks {
  /// Share of the selected positives found by the attack but missed by the baseline.
  double in_group = 0.0;
  /// The same share over all positives.
  double overall = 0.0;
};

/// Decisions are aligned over the same positives; `group` selects the subset.
SurprisingLinks surprising_links(std::span<const int> attack_decisions, std::span<const int> baseline_decisions,
                                 std::span<const std::size_t> group);

struct CdfPoint {
  double value = 0.0;
  double fraction = 0.0;
};

/// Empirical CDF of the largest entry of every posterior; one point per
/// distinct value, fractions ending at 1.
std::vector<CdfPoint> leading_probability_cdf(std::span<const std::vector<double>> posteriors);

}  // namespace linksteal
