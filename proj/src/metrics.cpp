#include "linksteal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace linksteal {

namespace {

// 1-based average ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite score");
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: scores and labels differ in length");
  require_finite(scores, "auc");
  double positives = 0.0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("auc: labels must be 0 or 1");
    positives += l;
  }
  const double negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) throw std::invalid_argument("auc needs both positive and negative pairs");
  const std::vector<double> ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (labels[i] == 1) rank_sum += ranks[i];
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (labels.empty()) throw std::invalid_argument("accuracy of an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

GroupReport robustness_groups(std::string metric, std::span<const double> positive_scores,
                              std::span<const double> positive_metric, std::span<const double> negative_scores) {
  if (positive_scores.size() != positive_metric.size()) {
    throw std::invalid_argument("robustness_groups: one metric value per positive required");
  }
  if (positive_scores.size() < kRobustnessGroups) {
    throw std::invalid_argument("robustness_groups needs at least 10 positive pairs");
  }
  if (negative_scores.empty()) throw std::invalid_argument("robustness_groups needs negative pairs");

  std::vector<std::size_t> order(positive_scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return positive_metric[a] != positive_metric[b] ? positive_metric[a] > positive_metric[b] : a < b;
  });

  GroupReport out;
  out.metric = std::move(metric);
  const std::size_t base = order.size() / kRobustnessGroups;
  const std::size_t extra = order.size() % kRobustnessGroups;
  std::size_t start = 0;
  for (std::size_t g = 0; g < kRobustnessGroups; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(start + size));
    for (std::size_t idx : members) {
      scores.push_back(positive_scores[idx]);
      labels.push_back(1);
    }
    for (double s : negative_scores) {
      scores.push_back(s);
      labels.push_back(0);
    }
    out.group_auc.push_back(auc(scores, labels));
    out.group_size.push_back(size);
    out.metric_high.push_back(positive_metric[members.front()]);
    out.metric_low.push_back(positive_metric[members.back()]);
    out.members.push_back(std::move(members));
    start += size;
  }
  return out;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson_correlation: length mismatch");
  if (x.size() < 2) return 0.0;
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman_correlation: length mismatch");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson_correlation(rx, ry);
}

SurprisingLinks surprising_links(std::span<const int> attack_decisions, std::span<const int> baseline_decisions,
                                 std::span<const std::size_t> group) {
  if (attack_decisions.size() != baseline_decisions.size()) {
    throw std::invalid_argument("surprising_links: verdicts are not aligned");
  }
  if (group.empty() || attack_decisions.empty()) throw std::invalid_argument("surprising_links: empty group");
  auto surprising = [&](std::size_t i) { return attack_decisions[i] == 1 && baseline_decisions[i] == 0; };
  std::size_t in_group = 0;
  for (std::size_t i : group) {
    if (i >= attack_decisions.size()) throw std::out_of_range("surprising_links: group index out of range");
    in_group += surprising(i);
  }
  std::size_t overall = 0;
  for (std::size_t i = 0; i < attack_decisions.size(); ++i) overall += surprising(i);
  return {static_cast<double>(in_group) / static_cast<double>(group.size()),
          static_cast<double>(overall) / static_cast<double>(attack_decisions.size())};
}

std::vector<CdfPoint> leading_probability_cdf(std::span<const std::vector<double>> posteriors) {
  if (posteriors.empty()) return {};
  std::vector<double> lead;
  lead.reserve(posteriors.size());
  for (const auto& p : posteriors) {
    if (p.empty()) throw std::invalid_argument("leading_probability_cdf: empty posterior");
    lead.push_back(*std::max_element(p.begin(), p.end()));
  }
  std::sort(lead.begin(), lead.end());
  std::vector<CdfPoint> out;
  const double n = static_cast<double>(lead.size());
  for (std::size_t i = 0; i < lead.size(); ++i) {
    if (i + 1 < lead.size() && lead[i + 1] == lead[i]) continue;
    out.push_back({lead[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

}  // namespace linksteal
