#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linksteal/metrics.hpp"
#include "linksteal/rng.hpp"

namespace linksteal {
namespace {

double auc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      total += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / total;
}

double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

void random_scores(Rng& rng, std::size_t n, std::vector<double>& s, std::vector<int>& y, bool coarse) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  s.resize(n);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = coarse ? std::round(uni(rng) * 10) / 10 : uni(rng);
    y[i] = uni(rng) < 0.4 ? 1 : 0;
  }
  y[0] = 1;
  y[1] = 0;
}

TEST(Auc, Examples) {
  const std::vector<double> s{0.9, 0.8, 0.1, 0.2};
  const std::vector<int> y{1, 1, 0, 0};
  EXPECT_EQ(auc(s, y), 1.0);
  const std::vector<double> flat(4, 0.3);
  EXPECT_EQ(auc(flat, y), 0.5);
}

TEST(Auc, MatchesPairCountOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    random_scores(rng, 200, s, y, trial % 2 == 0);
    EXPECT_NEAR(auc(s, y), auc_oracle(s, y), 1e-12);
  }
}

TEST(Auc, MonotoneTransformAndLabelFlip) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    random_scores(rng, 100, s, y, trial % 2 == 0);
    std::vector<double> t(s.size());
    std::transform(s.begin(), s.end(), t.begin(), [](double x) { return std::exp(3 * x) - 7; });
    EXPECT_NEAR(auc(t, y), auc(s, y), 1e-12);
    std::vector<int> flipped(y.size());
    std::transform(y.begin(), y.end(), flipped.begin(), [](int l) { return 1 - l; });
    EXPECT_NEAR(auc(s, y) + auc(s, flipped), 1.0, 1e-12);
  }
}

TEST(Auc, InvalidInputsThrow) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> same{1, 1}, bad{0, 2}, short_y{1};
  EXPECT_THROW(auc(s, same), std::invalid_argument);
  EXPECT_THROW(auc(s, bad), std::invalid_argument);
  EXPECT_ANY_THROW(auc(s, short_y));
  const std::vector<double> nan{0.1, std::nan("")};
  const std::vector<int> y{0, 1};
  EXPECT_THROW(auc(nan, y), std::invalid_argument);
}

TEST(Accuracy, Examples) {
  const std::vector<int> y{0, 1, 1, 0};
  const std::vector<int> flipped{1, 0, 0, 1};
  EXPECT_EQ(accuracy(y, y), 1.0);
  EXPECT_EQ(accuracy(flipped, y), 0.0);
  const std::vector<int> short_y{1};
  EXPECT_ANY_THROW(accuracy(short_y, y));
  Rng rng(3);
  std::uniform_int_distribution<int> pick(0, 4);
  std::vector<int> a(5000), b(5000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = pick(rng);
    b[i] = pick(rng);
  }
  EXPECT_NEAR(accuracy(a, b), 0.2, 0.05);
}

TEST(RobustnessGroups, SizesAndOrder) {
  std::vector<double> pos(23), metric(23);
  for (std::size_t i = 0; i < 23; ++i) {
    pos[i] = 0.5;
    metric[i] = static_cast<double>(i % 7);
  }
  const std::vector<double> neg{0.1, 0.2};
  const GroupReport r = robustness_groups("jaccard", pos, metric, neg);
  EXPECT_EQ(r.group_size, (std::vector<std::size_t>{3, 3, 3, 2, 2, 2, 2, 2, 2, 2}));
  for (std::size_t g = 0; g < 10; ++g) {
    EXPECT_EQ(r.group_auc[g], 1.0);
    EXPECT_GE(r.metric_high[g], r.metric_low[g]);
    if (g > 0) EXPECT_LE(r.metric_high[g], r.metric_low[g - 1]);
  }
  std::vector<std::size_t> all;
  for (const auto& m : r.members) all.insert(all.end(), m.begin(), m.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 23; ++i) EXPECT_EQ(all[i], i);
}

TEST(RobustnessGroups, DegenerateMetricStillDefined) {
  const std::vector<double> pos(30, 0.7), metric(30, 1.0), neg(30, 0.7);
  const GroupReport r = robustness_groups("common_neighbors", pos, metric, neg);
  for (double a : r.group_auc) EXPECT_EQ(a, 0.5);
  EXPECT_EQ(r.members.front().front(), 0u);
}

TEST(RobustnessGroups, MonotoneConstruction) {
  Rng rng(4);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> pos(100), metric(100), neg(200);
  for (std::size_t i = 0; i < 100; ++i) {
    metric[i] = uni(rng);
    pos[i] = metric[i];
  }
  for (double& x : neg) x = uni(rng);
  const GroupReport r = robustness_groups("preferential_attachment", pos, metric, neg);
  for (std::size_t g = 1; g < 10; ++g) EXPECT_LE(r.group_auc[g], r.group_auc[g - 1]);
  std::vector<double> all = pos;
  all.insert(all.end(), neg.begin(), neg.end());
  std::vector<int> labels(300, 0);
  std::fill(labels.begin(), labels.begin() + 100, 1);
  const double overall = auc(all, labels);
  EXPECT_GE(overall, *std::min_element(r.group_auc.begin(), r.group_auc.end()));
  EXPECT_LE(overall, *std::max_element(r.group_auc.begin(), r.group_auc.end()));
}

TEST(RobustnessGroups, TooFewPositivesThrows) {
  const std::vector<double> pos(9, 0.5), neg(3, 0.1);
  EXPECT_THROW(robustness_groups("jaccard", pos, pos, neg), std::invalid_argument);
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9}, z{-1, -2, -3, -4}, c{2, 2, 2, 2};
  EXPECT_NEAR(pearson_correlation(x, y), 1.0, 1e-15);
  EXPECT_NEAR(pearson_correlation(x, z), -1.0, 1e-15);
  EXPECT_EQ(pearson_correlation(x, c), 0.0);
  const std::vector<double> one{1};
  EXPECT_EQ(pearson_correlation(one, one), 0.0);
}

TEST(Pearson, MatchesTwoPassOracle) {
  Rng rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(60), y(60);
    for (std::size_t i = 0; i < 60; ++i) {
      x[i] = normal(rng);
      y[i] = 0.3 * x[i] + normal(rng);
    }
    EXPECT_NEAR(pearson_correlation(x, y), pearson_oracle(x, y), 1e-12);
  }
}

TEST(Spearman, RanksWithTies) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{1, 4, 9, 16, 100};
  EXPECT_NEAR(spearman_correlation(x, y), 1.0, 1e-15);
  const std::vector<double> t{1, 1, 2, 2, 3};
  const std::vector<double> ranks{1.5, 1.5, 3.5, 3.5, 5};
  EXPECT_NEAR(spearman_correlation(t, x), pearson_oracle(ranks, x), 1e-15);
}

TEST(SurprisingLinks, Examples) {
  const std::vector<int> a{1, 0, 1, 1}, b{1, 0, 1, 1}, wrong{0, 0, 0, 0}, right{1, 1, 1, 1};
  const std::vector<std::size_t> group{0, 2};
  EXPECT_EQ(surprising_links(a, b, group).in_group, 0.0);
  EXPECT_EQ(surprising_links(right, wrong, group).in_group, 1.0);
  EXPECT_EQ(surprising_links(right, wrong, group).overall, 1.0);
  EXPECT_THROW(surprising_links(a, b, std::span<const std::size_t>{}), std::invalid_argument);
}

TEST(SurprisingLinks, MatchesManualCount) {
  Rng rng(6);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> a(200), b(200);
  for (std::size_t i = 0; i < 200; ++i) {
    a[i] = coin(rng);
    b[i] = coin(rng);
  }
  std::vector<std::size_t> group;
  for (std::size_t i = 0; i < 200; i += 3) group.push_back(i);
  std::size_t in_group = 0, overall = 0;
  for (std::size_t i : group) in_group += a[i] == 1 && b[i] == 0;
  for (std::size_t i = 0; i < 200; ++i) overall += a[i] == 1 && b[i] == 0;
  const SurprisingLinks r = surprising_links(a, b, group);
  EXPECT_DOUBLE_EQ(r.in_group, static_cast<double>(in_group) / static_cast<double>(group.size()));
  EXPECT_DOUBLE_EQ(r.overall, static_cast<double>(overall) / 200.0);
}

TEST(LeadingProbabilityCdf, StepFunctions) {
  const std::vector<std::vector<double>> onehot{{1, 0}, {0, 1}, {0, 0, 1}};
  const auto a = leading_probability_cdf(onehot);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].value, 1.0);
  EXPECT_EQ(a[0].fraction, 1.0);
  const std::vector<std::vector<double>> uniform(5, std::vector<double>(4, 0.25));
  const auto b = leading_probability_cdf(uniform);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].value, 0.25);
}

TEST(LeadingProbabilityCdf, NonDecreasingEndsAtOne) {
  Rng rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<std::vector<double>> posts(100);
  for (auto& p : posts) {
    const double a = uni(rng);
    p = {a, 1 - a};
  }
  const auto cdf = leading_probability_cdf(posts);
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    EXPECT_GT(cdf[i].value, cdf[i - 1].value);
    EXPECT_GT(cdf[i].fraction, cdf[i - 1].fraction);
  }
  EXPECT_EQ(cdf.back().fraction, 1.0);
  EXPECT_GE(cdf.front().value, 0.5);
}

}  // namespace
}  // namespace linksteal
