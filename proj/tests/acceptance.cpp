// One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <queue>
#include <set>
#include <sstream>
#include <string>

#include "linksteal/experiment.hpp"
#include "linksteal/features.hpp"
#include "support/gradcheck.hpp"

namespace {

using namespace linksteal;
using testing::gradient_error;
using testing::random_tensor;
namespace fs = std::filesystem;

struct Verdict {
  enum Kind { Pass, Fail, Skip } kind = Fail;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Parameter random_param(std::size_t r, std::size_t c, Rng& rng) { return Parameter(random_tensor(r, c, rng)); }

// Random edges on 4 nodes plus a self-loop on each node.
std::vector<Edge> random_small_graph(Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<Edge> edges;
  for (int v = 0; v < 4; ++v) edges.emplace_back(v, v);
  for (int u = 0; u < 4; ++u)
    for (int v = u + 1; v < 4; ++v)
      if (coin(rng)) edges.emplace_back(u, v);
  return edges;
}

std::shared_ptr<const EdgeIndex> directed(const std::vector<Edge>& edges) {
  auto e = std::make_shared<EdgeIndex>();
  e->num_nodes = 4;
  for (const Edge& x : edges) {
    e->src.push_back(x.u);
    e->dst.push_back(x.v);
    if (!x.is_self_loop()) {
      e->src.push_back(x.v);
      e->dst.push_back(x.u);
    }
  }
  return e;
}

Verdict gradient_suite() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  auto check = [&](const std::string& name, const testing::Builder& build, std::vector<Parameter*> params,
                   std::uint64_t seed) {
    const double err = gradient_error(build, std::move(params), seed);
    if (!(err <= worst)) {
      worst = err;
      worst_name = name;
    }
  };

  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    Rng rng(100 + trial);
    const auto edges = directed(random_small_graph(rng));
    auto weights = std::make_shared<std::vector<double>>();
    for (std::size_t i = 0; i < edges->num_edges(); ++i) weights->push_back(random_tensor(1, 1, rng)[0]);
    Parameter a = random_param(4, 3, rng), b = random_param(4, 3, rng), w = random_param(3, 5, rng);
    Parameter bias = random_param(1, 3, rng), s = random_param(1, 1, rng);
    Parameter col1 = random_param(4, 1, rng), col2 = random_param(4, 1, rng);
    for (double& x : a.value.data()) x += x < 0 ? -0.05 : 0.05;
    const std::vector<int> labels{0, 2, 1, 2};
    check("add", [](Tape&, std::vector<Var>& v) { return ops::add(v[0], v[1]); }, {&a, &b}, trial);
    check("add_bias", [](Tape&, std::vector<Var>& v) { return ops::add_bias(v[0], v[1]); }, {&a, &bias}, trial);
    check("hadamard", [](Tape&, std::vector<Var>& v) { return ops::hadamard(v[0], v[1]); }, {&a, &b}, trial);
    check("scale", [](Tape&, std::vector<Var>& v) { return ops::scale(v[0], -1.3); }, {&a}, trial);
    check("scalar_mul", [](Tape&, std::vector<Var>& v) { return ops::scalar_mul(v[0], v[1]); }, {&a, &s}, trial);
    check("matmul", [](Tape&, std::vector<Var>& v) { return ops::matmul(v[0], v[1]); }, {&a, &w}, trial);
    check("relu", [](Tape&, std::vector<Var>& v) { return ops::relu(v[0]); }, {&a}, trial);
    check("leaky_relu", [](Tape&, std::vector<Var>& v) { return ops::leaky_relu(v[0], 0.2); }, {&a}, trial);
    check("dropout",
          [](Tape&, std::vector<Var>& v) {
            Rng mask(7);
            return ops::dropout(v[0], 0.3, true, mask);
          },
          {&a}, trial);
    check("concat_cols",
          [](Tape&, std::vector<Var>& v) {
            const Var parts[] = {v[0], v[1]};
            return ops::concat_cols(parts);
          },
          {&a, &b}, trial);
    check("aggregate", [&](Tape&, std::vector<Var>& v) { return ops::aggregate(v[0], edges, weights); }, {&a}, trial);
    check("edge_scores", [&](Tape&, std::vector<Var>& v) { return ops::edge_scores(v[0], v[1], edges); },
          {&col1, &col2}, trial);
    check("segment_softmax",
          [&](Tape&, std::vector<Var>& v) { return ops::segment_softmax(ops::edge_scores(v[0], v[1], edges), edges); },
          {&col1, &col2}, trial);
    check("edge_weighted_aggregate",
          [&](Tape&, std::vector<Var>& v) {
            return ops::edge_weighted_aggregate(ops::edge_scores(v[1], v[2], edges), v[0], edges);
          },
          {&a, &col1, &col2}, trial);
    check("softmax", [](Tape&, std::vector<Var>& v) { return ops::softmax(v[0], 3.0); }, {&a}, trial);
    check("softmax_cross_entropy",
          [&](Tape&, std::vector<Var>& v) { return ops::softmax_cross_entropy(v[0], labels); }, {&a}, trial);

    const MessageGraph mg(4, random_small_graph(rng));
    for (GnnKind kind : {GnnKind::Gcn, GnnKind::Sage, GnnKind::Gat, GnnKind::Gin}) {
      GnnLayer layer = GnnLayer::create(kind, 3, 4, kind == GnnKind::Gat ? 2 : 1, rng);
      for (Parameter& p : layer.params) p.value = random_tensor(p.value.rows(), p.value.cols(), rng);
      Parameter h = random_param(4, 3, rng);
      std::vector<Parameter*> params{&h};
      for (Parameter& p : layer.params) params.push_back(&p);
      check(std::string("layer ") + std::string(to_string(kind)),
            [&](Tape& tape, std::vector<Var>& v) {
              Rng unused(0);
              return layer_forward(tape, layer, v[0], mg, false, false, 0.0, unused);
            },
            params, trial);
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = worst < 1e-4 && elapsed < 10.0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("max relative error %.2e (%s), %.2f s", worst, worst_name.c_str(), elapsed)};
}

double auc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        total += 1.0;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return wins / total;
}

Graph random_graph(std::size_t n, double p, Rng& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (coin(rng)) edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  return Graph(n, edges, random_tensor(n, 2, rng), std::vector<int>(n, 0), 2);
}

std::set<NodeId> bfs(const Graph& g, NodeId center, int k, std::optional<Edge> exclude) {
  std::map<NodeId, int> dist{{center, 0}};
  std::queue<NodeId> q;
  q.push(center);
  while (!q.empty()) {
    const NodeId x = q.front();
    q.pop();
    if (dist[x] == k) continue;
    for (const Edge& e : g.edges()) {
      if ((exclude && e == *exclude) || !e.touches(x)) continue;
      const NodeId y = e.u == x ? e.v : e.u;
      if (!dist.count(y)) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
    }
  }
  std::set<NodeId> out;
  for (const auto& [v, d] : dist) out.insert(v);
  return out;
}

Verdict oracle_equivalence() {
  Rng rng(2024);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double auc_gap = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + static_cast<std::size_t>(uni(rng) * 200);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial % 2 ? uni(rng) : std::floor(uni(rng) * 8);
      y[i] = uni(rng) < 0.5;
    }
    y[0] = 1;
    y[1] = 0;
    auc_gap = std::max(auc_gap, std::abs(auc(s, y) - auc_oracle(s, y)));
  }

  std::size_t khop_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = random_graph(5 + static_cast<std::size_t>(uni(rng) * 25), 0.05 + 0.3 * uni(rng), rng);
    const NodeId v = static_cast<NodeId>(uni(rng) * static_cast<double>(g.num_nodes()));
    const int k = static_cast<int>(uni(rng) * 3);
    std::optional<Edge> exclude;
    if (g.num_edges() > 0 && trial % 3 != 0)
      exclude = g.edges()[static_cast<std::size_t>(uni(rng) * static_cast<double>(g.num_edges()))];
    const Subgraph sub = khop_subgraph(g, v, k, exclude);
    const std::set<NodeId> want = bfs(g, v, k, exclude);
    std::set<Edge> want_edges;
    for (NodeId x : want) want_edges.emplace(x, x);
    for (const Edge& e : g.edges())
      if (want.count(e.u) && want.count(e.v) && !(exclude && e == *exclude)) want_edges.insert(e);
    const std::set<NodeId> got(sub.nodes.begin(), sub.nodes.end());
    const std::set<Edge> got_edges(sub.edges.begin(), sub.edges.end());
    if (got != want || got_edges != want_edges || sub.nodes.size() != got.size() || sub.nodes.front() != v) ++khop_bad;
  }

  std::size_t prox_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    if (trial % 50 == 0) rng.discard(1);
    const Graph g = random_graph(40, 0.15, rng);
    const NodeId u = static_cast<NodeId>(uni(rng) * 40);
    NodeId v = static_cast<NodeId>(uni(rng) * 39);
    if (v >= u) ++v;
    std::set<NodeId> nu, nv;
    for (const Edge& e : g.edges()) {
      if (e == Edge(u, v)) continue;
      if (e.touches(u)) nu.insert(e.u == u ? e.v : e.u);
      if (e.touches(v)) nv.insert(e.u == v ? e.v : e.u);
    }
    std::set<NodeId> inter, uni_set = nu;
    for (NodeId x : nu)
      if (nv.count(x)) inter.insert(x);
    uni_set.insert(nv.begin(), nv.end());
    const double cn = static_cast<double>(inter.size());
    const std::vector<double> want{cn, uni_set.empty() ? 0.0 : cn / static_cast<double>(uni_set.size()),
                                   static_cast<double>(nu.size() * nv.size())};
    if (graph_block(g, u, v, 1).values != want || graph_block(make_query_context(g, u, v, 2)).values != want)
      ++prox_bad;
  }
  const bool ok = auc_gap <= 1e-12 && khop_bad == 0 && prox_bad == 0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("AUC max gap %.1e over 50 sets; k-hop mismatches %zu/100; proximity mismatches %zu/500", auc_gap,
              khop_bad, prox_bad)};
}

Verdict symmetry_suite() {
  const ExperimentConfig cfg;
  const Graph g = load_source(cfg.dataset);
  const SplitBundle splits = make_splits(g, 1);
  const TrainedGnn target = train_gnn(splits.target_train, cfg.gnn, derive_seed(1, "target-train"));
  const TrainedGnn shadow = train_gnn(splits.shadow_train, cfg.gnn, derive_seed(1, "shadow-train"));
  const PairDataset train_pairs = build_pair_dataset(splits.shadow_train, 2, PairSource::ShadowTrain);
  std::vector<int> labels;
  for (const LabeledPair& p : train_pairs.pairs) labels.push_back(p.label);
  PairFeatureBuilder builder(&shadow, splits.shadow_train, train_pairs.pairs);

  const Graph& tg = splits.target_train;
  Rng rng(3);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(tg.num_nodes()) - 1);
  std::vector<Edge> pairs;
  for (std::size_t i = 0; i < 100 && i < tg.num_edges(); ++i) pairs.push_back(tg.edges()[(i * 7) % tg.num_edges()]);
  while (pairs.size() < 200) {
    const NodeId u = pick(rng), v = pick(rng);
    if (u != v) pairs.emplace_back(u, v);
  }

  std::size_t checked = 0, mismatched = 0;
  for (const AttackSpec& spec : attack_table()) {
    const MultiInputMlp model = train_attack(spec, builder.assemble(spec), labels, derive_seed(4, "attack-train"));
    for (const Edge& e : pairs) {
      const double forward = infer_link(model, assemble_features(spec, &target, tg, e.u, e.v)).score;
      const double backward = infer_link(model, assemble_features(spec, &target, tg, e.v, e.u)).score;
      ++checked;
      if (forward != backward) ++mismatched;
    }
  }
  return {mismatched == 0 ? Verdict::Pass : Verdict::Fail,
          fmt("%zu of %zu (spec, pair) scores differ under endpoint swap", mismatched, checked)};
}

struct DeskResults {
  RunReport main;
  RunReport control;
  double seconds = 0.0;
};

const DeskResults& desk_results() {
  static const DeskResults results = [] {
    DeskResults r;
    ExperimentConfig cfg;
    cfg.attacks = {AttackId::A1, AttackId::A2, AttackId::A8, AttackId::A9};
    cfg.runs = 5;
    const auto start = std::chrono::steady_clock::now();
    r.main = run_experiment(cfg);
    r.seconds = seconds_since(start);
    ExperimentConfig control = cfg;
    control.attacks = {AttackId::A1};
    control.shuffle_labels = true;
    r.control = run_experiment(control);
    return r;
  }();
  return results;
}

Verdict signal_recovery() {
  const DeskResults& r = desk_results();
  const double a1 = r.main.mean_auc(AttackId::A1);
  const double ctrl = r.control.mean_auc(AttackId::A1);
  const bool ok = a1 > 0.75 && a1 > ctrl && ctrl >= 0.45 && ctrl <= 0.55 && r.seconds < 300.0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("Attack-1 mean AUC %.4f, shuffled-label control %.4f, 5 runs (with Attacks 2/8/9) in %.1f s", a1, ctrl,
              r.seconds)};
}

Verdict within(double value, double target, double tol) {
  return {std::abs(value - target) <= tol ? Verdict::Pass : Verdict::Fail, ""};
}

Verdict cora_reproduction(RunReport* cora_out) {
  const char* dir = std::getenv("LINKSTEAL_CORA_DIR");
  if (dir == nullptr || !fs::exists(dir)) return {Verdict::Skip, "set LINKSTEAL_CORA_DIR to a Cora dataset directory"};
  ExperimentConfig cfg;
  cfg.dataset.path = dir;
  cfg.attacks = {AttackId::B0, AttackId::A0, AttackId::A1, AttackId::A2, AttackId::A8, AttackId::A9};
  cfg.runs = 5;
  *cora_out = run_experiment(cfg);
  const double acc = cora_out->mean_target_accuracy();
  const double a0 = cora_out->mean_auc(AttackId::A0);
  const double a9 = cora_out->mean_auc(AttackId::A9);
  const double b0 = cora_out->mean_auc(AttackId::B0);
  const bool ok = within(acc, 0.773, 0.03).kind == Verdict::Pass && within(a0, 0.859, 0.05).kind == Verdict::Pass &&
                  within(a9, 0.909, 0.05).kind == Verdict::Pass && within(b0, 0.748, 0.05).kind == Verdict::Pass;
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("target accuracy %.4f (0.773), Attack-0 %.4f (0.859), Attack-9 %.4f (0.909), Baseline-0 %.4f (0.748)",
              acc, a0, a9, b0)};
}

bool ordering_holds(const RunReport& r, std::string& detail) {
  const double a1 = r.mean_auc(AttackId::A1), a2 = r.mean_auc(AttackId::A2);
  const double a8 = r.mean_auc(AttackId::A8), a9 = r.mean_auc(AttackId::A9);
  detail += fmt("A1 %.4f <= A8 %.4f, A2 %.4f <= A9 %.4f", a1, a8, a2, a9);
  return a8 >= a1 - 0.02 && a9 >= a2 - 0.02 && a1 >= 0.6 && a2 >= 0.6;
}

Verdict ordering(const RunReport* cora) {
  std::string detail = "planted: ";
  bool ok = ordering_holds(desk_results().main, detail);
  if (cora != nullptr) {
    detail += "; Cora: ";
    ok = ordering_holds(*cora, detail) && ok;
  }
  return {ok ? Verdict::Pass : Verdict::Fail, detail};
}

Verdict defense_behaviour() {
  ExperimentConfig cfg;
  cfg.runs = 3;
  cfg.attacks = {AttackId::A1};
  cfg.target_arch = GnnKind::Gcn;
  cfg.shadow_arch = GnnKind::Gcn;
  std::vector<double> eps;
  for (int e = 1; e <= 10; ++e) eps.push_back(e);
  cfg.defense.kind = DefenseKind::EdgeRand;
  const SweepReport edge = run_defense_sweep(cfg, eps);
  std::vector<double> acc, auc_values;
  for (const SweepRow& row : edge.rows) {
    acc.push_back(row.target_accuracy);
    auc_values.push_back(row.attack_auc);
  }
  const double rho_acc = spearman_correlation(eps, acc);
  const double rho_auc = spearman_correlation(eps, auc_values);

  cfg.runs = 1;
  cfg.defense.kind = DefenseKind::LapGraph;
  const SweepReport lap = run_defense_sweep(cfg, eps);
  std::size_t mismatches = 0;
  for (const SweepRow& row : lap.rows) mismatches += row.estimate_mismatches;
  const bool ok = rho_acc > 0.6 && rho_auc > 0.6 && mismatches == 0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("EdgeRand Spearman(eps, accuracy) %.3f, Spearman(eps, Attack-1 AUC) %.3f; accuracy %.3f..%.3f, AUC "
              "%.3f..%.3f; LapGraph estimate mismatches %zu",
              rho_acc, rho_auc, acc.front(), acc.back(), auc_values.front(), auc_values.back(), mismatches)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  ExperimentConfig cfg;
  cfg.attacks = {AttackId::B2, AttackId::A0, AttackId::A7};
  cfg.runs = 2;
  cfg.gnn.epochs = 50;
  cfg.attack_training.epochs = 50;
  cfg.defense.kind = DefenseKind::EdgeRand;
  cfg.defense.epsilon = 6;
  const fs::path root = fs::temp_directory_path() / "linksteal_acceptance_determinism";
  fs::remove_all(root);
  for (const char* side : {"a", "b"}) {
    ExperimentConfig c = cfg;
    c.artifacts = root / side / "artifacts";
    write_run_report(root / side, run_experiment(c));
    write_sweep_report(root / side, run_defense_sweep(c, {2.0, 8.0}));
  }
  std::size_t files = 0, differ = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    if (slurp(entry.path()) != slurp(root / "b" / fs::relative(entry.path(), root / "a"))) ++differ;
  }
  fs::remove_all(root);
  return {files > 0 && differ == 0 ? Verdict::Pass : Verdict::Fail,
          fmt("%zu of %zu CSV reports differ between identical invocations", differ, files)};
}

}  // namespace

int main() {
  RunReport cora;
  bool have_cora = false;
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"gradient suite", gradient_suite},
      {"oracle equivalence", oracle_equivalence},
      {"order symmetry", symmetry_suite},
      {"signal recovery", signal_recovery},
      {"reference reproduction",
       [&] {
         Verdict v = cora_reproduction(&cora);
         have_cora = v.kind != Verdict::Skip;
         return v;
       }},
      {"combined attack ordering", [&] { return ordering(have_cora ? &cora : nullptr); }},
      {"defense behaviour", defense_behaviour},
      {"determinism", determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.kind == Verdict::Pass ? "PASS" : v.kind == Verdict::Skip ? "SKIP" : "FAIL";
    if (v.kind == Verdict::Fail) ++failures;
    std::printf("criterion %d %-26s %s  %s  [%.1f s]\n", index, name, tag, v.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
