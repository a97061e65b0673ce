#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "linksteal/checkpoint.hpp"
#include "linksteal/data.hpp"
#include "linksteal/gnn.hpp"
#include "support/gradcheck.hpp"

namespace linksteal {
namespace {

using testing::gradient_error;
using testing::random_tensor;

// Neighbourhood lists with a self-loop on every node; node 4 is isolated.
const std::vector<Edge> kEdges{{0, 1}, {1, 2}, {2, 3}, {0, 2}};
constexpr std::size_t kNodes = 5;

std::vector<std::vector<int>> closed_neighborhoods() {
  std::vector<std::vector<int>> nb(kNodes);
  for (std::size_t v = 0; v < kNodes; ++v) nb[v].push_back(static_cast<int>(v));
  for (const Edge& e : kEdges) {
    nb[static_cast<std::size_t>(e.u)].push_back(e.v);
    nb[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  return nb;
}

MessageGraph message_graph() {
  std::vector<Edge> edges = kEdges;
  for (std::size_t v = 0; v < kNodes; ++v) edges.emplace_back(static_cast<int>(v), static_cast<int>(v));
  return MessageGraph(kNodes, edges);
}

std::vector<double> row_times(std::span<const double> x, const Tensor& w, std::size_t offset = 0) {
  std::vector<double> out(w.cols(), 0.0);
  for (std::size_t j = 0; j < w.cols(); ++j)
    for (std::size_t k = 0; k < x.size(); ++k) out[j] += x[k] * w(offset + k, j);
  return out;
}

Tensor oracle(const GnnLayer& layer, const Tensor& h) {
  const auto nb = closed_neighborhoods();
  Tensor out(kNodes, layer.out_dim);
  for (std::size_t v = 0; v < kNodes; ++v) {
    std::vector<double> o(layer.out_dim, 0.0);
    switch (layer.kind) {
      case GnnKind::Gcn:
        for (int u : nb[v]) {
          const auto z = row_times(h.row(static_cast<std::size_t>(u)), layer.params[0].value);
          for (std::size_t j = 0; j < o.size(); ++j) o[j] += z[j] / static_cast<double>(nb[v].size());
        }
        for (std::size_t j = 0; j < o.size(); ++j) o[j] += layer.params[1].value[j];
        break;
      case GnnKind::Sage: {
        std::vector<double> mean(layer.in_dim, 0.0);
        for (int u : nb[v])
          for (std::size_t k = 0; k < layer.in_dim; ++k)
            mean[k] += h(static_cast<std::size_t>(u), k) / static_cast<double>(nb[v].size());
        const auto a = row_times(h.row(v), layer.params[0].value, 0);
        const auto b = row_times(mean, layer.params[0].value, layer.in_dim);
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = a[j] + b[j] + layer.params[1].value[j];
        break;
      }
      case GnnKind::Gat: {
        const std::size_t hd = layer.head_dim();
        for (std::size_t k = 0; k < layer.heads; ++k) {
          const Tensor& w = layer.params[3 * k].value;
          const Tensor& as = layer.params[3 * k + 1].value;
          const Tensor& ad = layer.params[3 * k + 2].value;
          auto score = [&](const std::vector<double>& z, const Tensor& a) {
            double s = 0.0;
            for (std::size_t j = 0; j < hd; ++j) s += z[j] * a[j];
            return s;
          };
          const auto zv = row_times(h.row(v), w);
          std::vector<double> e;
          std::vector<std::vector<double>> zs;
          for (int u : nb[v]) {
            zs.push_back(row_times(h.row(static_cast<std::size_t>(u)), w));
            const double raw = score(zs.back(), as) + score(zv, ad);
            e.push_back(raw > 0 ? raw : 0.2 * raw);
          }
          double denom = 0.0;
          for (double x : e) denom += std::exp(x);
          for (std::size_t i = 0; i < e.size(); ++i)
            for (std::size_t j = 0; j < hd; ++j) o[k * hd + j] += std::exp(e[i]) / denom * zs[i][j];
        }
        for (std::size_t j = 0; j < o.size(); ++j) o[j] += layer.params[3 * layer.heads].value[j];
        break;
      }
      case GnnKind::Gin: {
        const double eps = layer.params[4].value[0];
        std::vector<double> s(layer.in_dim);
        for (std::size_t k = 0; k < layer.in_dim; ++k) s[k] = (1 + eps) * h(v, k);
        for (int u : nb[v])
          if (static_cast<std::size_t>(u) != v)
            for (std::size_t k = 0; k < layer.in_dim; ++k) s[k] += h(static_cast<std::size_t>(u), k);
        auto hidden = row_times(s, layer.params[0].value);
        for (std::size_t j = 0; j < hidden.size(); ++j) hidden[j] = std::max(0.0, hidden[j] + layer.params[1].value[j]);
        const auto z = row_times(hidden, layer.params[2].value);
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = z[j] + layer.params[3].value[j];
        break;
      }
    }
    for (std::size_t j = 0; j < o.size(); ++j) out(v, j) = o[j];
  }
  return out;
}

GnnLayer random_layer(GnnKind kind, std::size_t in, std::size_t out, std::size_t heads, std::uint64_t seed) {
  Rng rng(seed);
  GnnLayer layer = GnnLayer::create(kind, in, out, heads, rng);
  for (Parameter& p : layer.params) p.value = random_tensor(p.value.rows(), p.value.cols(), rng);
  return layer;
}

class LayerTest : public ::testing::TestWithParam<GnnKind> {};

TEST_P(LayerTest, MatchesLoopOracle) {
  const std::size_t heads = GetParam() == GnnKind::Gat ? 2 : 1;
  GnnLayer layer = random_layer(GetParam(), 3, 4, heads, 21);
  Rng rng(4);
  const Tensor h = random_tensor(kNodes, 3, rng);
  const MessageGraph mg = message_graph();
  Tape tape;
  const Tensor got = layer_forward(tape, std::as_const(layer), tape.constant(h), mg, false).value();
  const Tensor want = oracle(layer, h);
  ASSERT_TRUE(got.same_shape(want));
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST_P(LayerTest, GradientCheck) {
  const std::size_t heads = GetParam() == GnnKind::Gat ? 2 : 1;
  GnnLayer layer = random_layer(GetParam(), 3, 4, heads, 22);
  Rng rng(5);
  Parameter h(random_tensor(kNodes, 3, rng));
  const MessageGraph mg = message_graph();
  std::vector<Parameter*> params{&h};
  for (Parameter& p : layer.params) params.push_back(&p);
  const double err = gradient_error(
      [&](Tape& tape, std::vector<Var>& v) {
        Rng unused(0);
        return layer_forward(tape, layer, v[0], mg, false, false, 0.0, unused);
      },
      params);
  EXPECT_LT(err, 1e-6);
}

TEST_P(LayerTest, SubgraphInferenceMatchesTape) {
  const std::size_t heads = GetParam() == GnnKind::Gat ? 2 : 1;
  const GnnLayer layer = random_layer(GetParam(), 3, 4, heads, 23);
  PlantedPartitionParams params;
  params.nodes = 30;
  params.feature_dim = 3;
  params.p_in = 0.3;
  const Graph g = generate_planted_partition(params, 2);
  const Subgraph sub = khop_subgraph(g, 0, 2);
  const MessageGraph mg = MessageGraph::from_subgraph(sub);
  Tape tape;
  const Tensor want = layer_forward(tape, layer, tape.constant(sub.feature_view), mg, true).value();
  EXPECT_EQ(layer_forward(layer, sub.feature_view, sub), want);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, LayerTest,
                         ::testing::Values(GnnKind::Gcn, GnnKind::Sage, GnnKind::Gat, GnnKind::Gin),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(GnnLayer, ParameterShapes) {
  Rng rng(1);
  const GnnLayer gat = GnnLayer::create(GnnKind::Gat, 6, 8, 2, rng);
  ASSERT_EQ(gat.params.size(), 7u);
  EXPECT_EQ(gat.params[0].value.shape(), (std::array<std::size_t, 2>{6, 4}));
  EXPECT_EQ(gat.params[1].value.shape(), (std::array<std::size_t, 2>{4, 1}));
  EXPECT_EQ(gat.params[6].value.shape(), (std::array<std::size_t, 2>{1, 8}));
  const GnnLayer sage = GnnLayer::create(GnnKind::Sage, 6, 8, 1, rng);
  EXPECT_EQ(sage.params[0].value.shape(), (std::array<std::size_t, 2>{12, 8}));
  const GnnLayer gin = GnnLayer::create(GnnKind::Gin, 6, 8, 1, rng);
  ASSERT_EQ(gin.params.size(), 5u);
  EXPECT_EQ(gin.params[4].value.shape(), (std::array<std::size_t, 2>{1, 1}));
}

TEST(GnnLayer, WrongInputWidthThrows) {
  GnnLayer layer = random_layer(GnnKind::Gcn, 3, 4, 1, 1);
  Tape tape;
  EXPECT_THROW(layer_forward(tape, std::as_const(layer), tape.constant(Tensor(kNodes, 2)), message_graph(), false),
               ShapeError);
}

TEST(GnnLayer, MissingSelfLoopThrowsExceptForGin) {
  const MessageGraph bare(kNodes, kEdges);
  EXPECT_TRUE(bare.has_empty_neighborhood());
  Tape tape;
  const Var h = tape.constant(Tensor(kNodes, 3, 1.0));
  const GnnLayer gcn = random_layer(GnnKind::Gcn, 3, 4, 1, 1);
  const GnnLayer gin = random_layer(GnnKind::Gin, 3, 4, 1, 1);
  EXPECT_THROW(layer_forward(tape, gcn, h, bare, false), GraphError);
  EXPECT_NO_THROW(layer_forward(tape, gin, h, bare, false));
}

TEST(ParseGnnKind, Names) {
  EXPECT_EQ(parse_gnn_kind("graphsage"), GnnKind::Sage);
  EXPECT_EQ(parse_gnn_kind("gat"), GnnKind::Gat);
  EXPECT_THROW(parse_gnn_kind("mlp"), std::invalid_argument);
}

Graph two_class_graph(std::uint64_t seed) {
  PlantedPartitionParams params;
  params.nodes = 120;
  params.communities = 2;
  params.p_in = 0.1;
  params.p_out = 0.01;
  params.feature_dim = 8;
  params.noise = 1.0;
  return generate_planted_partition(params, seed);
}

class TrainingTest : public ::testing::TestWithParam<GnnKind> {};

TEST_P(TrainingTest, FitsSeparableCommunities) {
  GnnConfig cfg;
  cfg.kind = GetParam();
  cfg.hidden = 16;
  const Graph g = two_class_graph(9);
  const TrainedGnn model = train_gnn(g, cfg, 1);
  EXPECT_GT(node_accuracy(model, g), 0.9);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, TrainingTest,
                         ::testing::Values(GnnKind::Gcn, GnnKind::Sage, GnnKind::Gat, GnnKind::Gin),
                         [](const auto& info) { return std::string(to_string(info.param)); });

class QueryTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    GnnConfig cfg;
    cfg.hidden = 16;
    cfg.epochs = 30;
    graph_ = new Graph(two_class_graph(3));
    model_ = new TrainedGnn(train_gnn(*graph_, cfg, 2));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete graph_;
  }
  static Graph* graph_;
  static TrainedGnn* model_;
};
Graph* QueryTest::graph_ = nullptr;
TrainedGnn* QueryTest::model_ = nullptr;

TEST_F(QueryTest, PosteriorIsDistribution) {
  for (NodeId v = 0; v < 120; v += 11) {
    for (int k = 0; k <= 2; ++k) {
      const Posterior p = khop_query(*model_, khop_subgraph(*graph_, v, k));
      ASSERT_EQ(p.size(), 2u);
      double s = 0.0;
      for (double x : p.values) {
        EXPECT_GE(x, 0.0);
        s += x;
      }
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST_F(QueryTest, TemperatureFlattensButKeepsArgmax) {
  for (NodeId v = 0; v < 120; v += 13) {
    const Subgraph sub = khop_subgraph(*graph_, v, 2);
    const Posterior sharp = khop_query(*model_, sub);
    const Posterior soft = khop_query(*model_, sub, 20.0);
    EXPECT_EQ(argmax(sharp.values), argmax(soft.values));
    EXPECT_LE(std::abs(soft.values[0] - soft.values[1]), std::abs(sharp.values[0] - sharp.values[1]) + 1e-12);
    EXPECT_EQ(predict_label(*model_, sub), argmax(sharp.values));
  }
}

TEST_F(QueryTest, QueryIsDeterministic) {
  const Subgraph sub = khop_subgraph(*graph_, 5, 2);
  EXPECT_EQ(khop_query(*model_, sub).values, khop_query(*model_, sub).values);
}

TEST_F(QueryTest, ZeroHopIgnoresNeighbours) {
  const Graph isolated = graph_->with_edges({});
  for (NodeId v = 0; v < 120; v += 17) {
    EXPECT_EQ(khop_query(*model_, khop_subgraph(*graph_, v, 0)).values,
              khop_query(*model_, khop_subgraph(isolated, v, 2)).values);
  }
}

TEST_F(QueryTest, WholeGraphPredictionsMatchTwoHopQueries) {
  const std::vector<int> all = predict_all(*model_, *graph_);
  for (NodeId v = 0; v < 120; v += 7) {
    EXPECT_EQ(all[static_cast<std::size_t>(v)], predict_label(*model_, khop_subgraph(*graph_, v, 2)));
  }
}

TEST_F(QueryTest, CheckpointRoundTrip) {
  std::stringstream buf;
  save_checkpoint(buf, *model_);
  const TrainedGnn loaded = load_checkpoint(buf);
  EXPECT_EQ(loaded.arch, model_->arch);
  EXPECT_EQ(loaded.num_classes, model_->num_classes);
  ASSERT_EQ(loaded.layer1.params.size(), model_->layer1.params.size());
  for (std::size_t i = 0; i < loaded.layer1.params.size(); ++i)
    EXPECT_EQ(loaded.layer1.params[i].value, model_->layer1.params[i].value);
  const Subgraph sub = khop_subgraph(*graph_, 8, 2);
  EXPECT_EQ(khop_query(loaded, sub).values, khop_query(*model_, sub).values);
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::stringstream bad("NOTACKPT");
  EXPECT_THROW(load_checkpoint(bad), CheckpointError);
  GnnConfig cfg;
  cfg.hidden = 4;
  Rng rng(1);
  std::stringstream buf;
  save_checkpoint(buf, init_gnn(cfg, 3, 2, rng));
  std::string bytes = buf.str();
  bytes.resize(bytes.size() - 8);
  std::stringstream truncated(bytes);
  EXPECT_THROW(load_checkpoint(truncated), CheckpointError);
}

TEST(TrainGnn, SameSeedSameModel) {
  GnnConfig cfg;
  cfg.hidden = 8;
  cfg.epochs = 5;
  const Graph g = two_class_graph(4);
  const TrainedGnn a = train_gnn(g, cfg, 7);
  const TrainedGnn b = train_gnn(g, cfg, 7);
  for (std::size_t i = 0; i < a.layer2.params.size(); ++i) EXPECT_EQ(a.layer2.params[i].value, b.layer2.params[i].value);
}

}  // namespace
}  // namespace linksteal
