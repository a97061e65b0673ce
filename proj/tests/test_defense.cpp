#include <gtest/gtest.h>

#include <cmath>

#include "linksteal/data.hpp"
#include "linksteal/defense.hpp"

namespace linksteal {
namespace {

PerturbedAdjacency random_adjacency(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  PerturbedAdjacency adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) adj.set(i, j, true);
  return adj;
}

TEST(DefenseConfig, Validation) {
  DefenseConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.temperature = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.epsilon = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.budget_split = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(parse_defense_kind("label_only"), DefenseKind::LabelOnly);
  EXPECT_EQ(parse_defense_kind("lapgraph"), DefenseKind::LapGraph);
  EXPECT_THROW(parse_defense_kind("noise"), std::invalid_argument);
}

TEST(LabelOnlyFeature, Examples) {
  EXPECT_EQ(label_only_feature(1, 1, 3), (std::vector<double>{0, 2, 0}));
  EXPECT_EQ(label_only_feature(0, 2, 3), (std::vector<double>{1, 0, 1}));
  EXPECT_THROW(label_only_feature(3, 0, 3), std::out_of_range);
  EXPECT_THROW(label_only_feature(-1, 0, 3), std::out_of_range);
}

TEST(LabelOnlyFeature, OrderSymmetricForAllPairs) {
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) EXPECT_EQ(label_only_feature(a, b, 5), label_only_feature(b, a, 5));
}

TEST(PerturbedAdjacency, SymmetricNoDiagonal) {
  PerturbedAdjacency adj(4);
  adj.set(2, 1, true);
  EXPECT_TRUE(adj(1, 2));
  EXPECT_TRUE(adj.symmetric());
  EXPECT_EQ(adj.num_edges(), 1u);
  EXPECT_EQ(adj.edges(), std::vector<Edge>{Edge(1, 2)});
  EXPECT_THROW(adj.set(3, 3, true), std::invalid_argument);
}

TEST(EdgeRand, FlipProbabilityClosedForms) {
  EXPECT_NEAR(edge_rand_flip_probability(std::log(3.0)), 0.5, 1e-15);
  EXPECT_LT(edge_rand_flip_probability(20.0) * 1e4, 1.0);
  EXPECT_THROW(edge_rand(PerturbedAdjacency(3), 0.0, 1), std::invalid_argument);
}

TEST(EdgeRand, EmpiricalFlipRate) {
  const std::size_t n = 448;
  const PerturbedAdjacency adj = random_adjacency(n, 0.05, 1);
  const PerturbedAdjacency out = edge_rand(adj, 2.0, 7);
  EXPECT_TRUE(out.symmetric());
  std::size_t flips = 0, cells = 0;
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_FALSE(out(i, i));
    for (std::size_t j = i + 1; j < n; ++j) {
      ++cells;
      flips += adj(i, j) != out(i, j);
    }
  }
  ASSERT_GE(cells, 100000u);
  EXPECT_NEAR(static_cast<double>(flips) / static_cast<double>(cells), edge_rand_flip_probability(2.0), 0.005);
}

TEST(EdgeRand, DeterministicUnderSeed) {
  const PerturbedAdjacency adj = random_adjacency(40, 0.1, 2);
  EXPECT_EQ(edge_rand(adj, 1.0, 3).edges(), edge_rand(adj, 1.0, 3).edges());
  EXPECT_NE(edge_rand(adj, 1.0, 3).edges(), edge_rand(adj, 1.0, 4).edges());
}

TEST(LapGraph, VanishingNoiseKeepsInput) {
  const PerturbedAdjacency adj = random_adjacency(30, 0.2, 3);
  const LapGraphResult r = lap_graph(adj, 1e9, 0.01, 5);
  EXPECT_EQ(r.estimated_edges, adj.num_edges());
  EXPECT_EQ(r.adjacency.edges(), adj.edges());
}

TEST(LapGraph, EmptyGraphStaysNearEmpty) {
  const LapGraphResult r = lap_graph(PerturbedAdjacency(30), 1000.0, 0.01, 6);
  EXPECT_LE(r.estimated_edges, 1u);
  EXPECT_EQ(r.adjacency.num_edges(), r.estimated_edges);
}

TEST(LapGraph, EdgeCountMatchesEstimateAndTailBound) {
  const PerturbedAdjacency adj = random_adjacency(30, 0.1, 4);
  const double edges = static_cast<double>(adj.num_edges());
  const double scale = 1.0 / (0.01 * 5.0);
  std::size_t within = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const LapGraphResult r = lap_graph(adj, 5.0, 0.01, seed);
    EXPECT_EQ(r.adjacency.num_edges(), r.estimated_edges);
    EXPECT_TRUE(r.adjacency.symmetric());
    EXPECT_LE(r.estimated_edges, 30u * 29u / 2u);
    if (std::abs(static_cast<double>(r.estimated_edges) - edges) <= 3 * scale) ++within;
  }
  EXPECT_GE(within, 190u);
}

TEST(LapGraph, DeterministicAndValidated) {
  const PerturbedAdjacency adj = random_adjacency(25, 0.2, 5);
  EXPECT_EQ(lap_graph(adj, 2.0, 0.1, 9).adjacency.edges(), lap_graph(adj, 2.0, 0.1, 9).adjacency.edges());
  EXPECT_THROW(lap_graph(adj, 0.0, 0.1, 9), std::invalid_argument);
  EXPECT_THROW(lap_graph(adj, 1.0, 0.0, 9), std::invalid_argument);
}

TEST(PerturbGraph, QueryTimeDefensesLeaveGraph) {
  PlantedPartitionParams params;
  params.nodes = 40;
  const Graph g = generate_planted_partition(params, 1);
  DefenseConfig cfg;
  cfg.kind = DefenseKind::SoftPosterior;
  EXPECT_EQ(perturb_graph(g, cfg, 1).edges(), g.edges());
  cfg.kind = DefenseKind::EdgeRand;
  const Graph h = perturb_graph(g, cfg, 1);
  EXPECT_NE(h.edges(), g.edges());
  EXPECT_EQ(h.features(), g.features());
  EXPECT_EQ(h.labels(), g.labels());
}

class DefendedQuery : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    PlantedPartitionParams params;
    params.nodes = 60;
    params.communities = 3;
    params.feature_dim = 6;
    graph_ = new Graph(generate_planted_partition(params, 2));
    GnnConfig cfg;
    cfg.hidden = 8;
    cfg.epochs = 30;
    model_ = new TrainedGnn(train_gnn(*graph_, cfg, 3));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete graph_;
  }
  static Graph* graph_;
  static TrainedGnn* model_;
};
Graph* DefendedQuery::graph_ = nullptr;
TrainedGnn* DefendedQuery::model_ = nullptr;

TEST_F(DefendedQuery, NoneAndUnitTemperatureMatchPlainQuery) {
  DefenseConfig soft;
  soft.kind = DefenseKind::SoftPosterior;
  soft.temperature = 1.0;
  DefenseConfig edge_rand_cfg;
  edge_rand_cfg.kind = DefenseKind::EdgeRand;
  for (NodeId v = 0; v < 60; v += 7) {
    const Subgraph sub = khop_subgraph(*graph_, v, 2);
    const auto plain = khop_query(*model_, sub).values;
    EXPECT_EQ(apply_defended_query(*model_, sub, DefenseConfig{}).values, plain);
    EXPECT_EQ(apply_defended_query(*model_, sub, soft).values, plain);
    EXPECT_EQ(apply_defended_query(*model_, sub, edge_rand_cfg).values, plain);
  }
}

TEST_F(DefendedQuery, LabelOnlyHasOneOrTwoNonzeros) {
  DefenseConfig label;
  label.kind = DefenseKind::LabelOnly;
  for (NodeId u = 0; u < 60; u += 5) {
    for (NodeId v = 1; v < 60; v += 9) {
      const auto ru = apply_defended_query(*model_, khop_subgraph(*graph_, u, 1), label);
      const auto rv = apply_defended_query(*model_, khop_subgraph(*graph_, v, 1), label);
      EXPECT_TRUE(ru.label_only);
      const auto f = defended_pair_feature(ru, rv);
      ASSERT_EQ(f.size(), 3u);
      std::size_t nonzero = 0;
      double total = 0.0;
      for (double x : f) {
        nonzero += x != 0.0;
        total += x;
      }
      EXPECT_GE(nonzero, 1u);
      EXPECT_LE(nonzero, 2u);
      EXPECT_EQ(total, 2.0);
      EXPECT_EQ(f, defended_pair_feature(rv, ru));
    }
  }
}

TEST_F(DefendedQuery, SoftPosteriorKeepsPredictedLabel) {
  for (double t : {0.5, 5.0, 20.0, 100.0}) {
    DefenseConfig soft;
    soft.kind = DefenseKind::SoftPosterior;
    soft.temperature = t;
    for (NodeId v = 0; v < 60; v += 4) {
      const Subgraph sub = khop_subgraph(*graph_, v, 2);
      EXPECT_EQ(argmax(apply_defended_query(*model_, sub, soft).values), predict_label(*model_, sub));
    }
  }
}

}  // namespace
}  // namespace linksteal
