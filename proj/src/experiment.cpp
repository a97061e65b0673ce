#include "linksteal/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "linksteal/checkpoint.hpp"
#include "linksteal/features.hpp"
#include "linksteal/rng.hpp"

namespace linksteal {

namespace {

template <typename F>
auto stage(const char* name, std::size_t run, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, run, e.what());
  }
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::vector<int> labels_of(const PairDataset& d) {
  std::vector<int> out;
  out.reserve(d.pairs.size());
  for (const LabeledPair& p : d.pairs) out.push_back(p.label);
  return out;
}

void shuffle_pair_labels(PairDataset& d, Rng& rng) {
  std::vector<int> labels = labels_of(d);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < labels.size(); ++i) d.pairs[i].label = labels[i];
}

GnnConfig gnn_config(const ExperimentConfig& cfg, GnnKind kind) {
  GnnConfig g = cfg.gnn;
  g.kind = kind;
  return g;
}

std::FILE* open_csv(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot write " + path.string());
  return f;
}

struct Pipeline {
  SplitBundle splits;
  /// Graphs after the defense; models are trained, queried and evaluated on these.
  Graph target_served;
  Graph shadow_served;
  Graph target_test_served;
  Graph shadow_test_served;
  TrainedGnn target;
  TrainedGnn shadow;
  PairDataset train_pairs;
  PairDataset test_pairs;
};

/// Everything up to the attack models for one run. `shadow_source` provides
/// the shadow side when it differs from the target's dataset.
Pipeline prepare_run(const ExperimentConfig& cfg, const Graph& graph, const Graph* shadow_source, std::size_t run,
                     const DefenseConfig& defense) {
  const std::uint64_t seed = cfg.seed + run;
  Pipeline p;
  p.splits = stage("split", run, [&] { return make_splits(graph, seed, cfg.shadow_fraction); });
  if (shadow_source != nullptr) {
    SplitBundle other = stage("split", run, [&] {
      return make_splits(*shadow_source, derive_seed(seed, "shadow-split"), cfg.shadow_fraction);
    });
    p.splits.shadow_train = std::move(other.shadow_train);
    p.splits.shadow_test = std::move(other.shadow_test);
    p.splits.shadow_train_ids = std::move(other.shadow_train_ids);
    p.splits.shadow_test_ids = std::move(other.shadow_test_ids);
  }

  p.target_served = stage("defense", run, [&] {
    return perturb_graph(p.splits.target_train, defense, derive_seed(seed, "defense", 0));
  });
  p.shadow_served = stage("defense", run, [&] {
    return perturb_graph(p.splits.shadow_train, defense, derive_seed(seed, "defense", 1));
  });
  p.target_test_served = stage("defense", run, [&] {
    return perturb_graph(p.splits.target_test, defense, derive_seed(seed, "defense", 2));
  });
  p.shadow_test_served = stage("defense", run, [&] {
    return perturb_graph(p.splits.shadow_test, defense, derive_seed(seed, "defense", 3));
  });
  p.target = stage("target-train", run, [&] {
    return train_gnn(p.target_served, gnn_config(cfg, cfg.target_arch), derive_seed(seed, "target-train"));
  });
  p.shadow = stage("shadow-train", run, [&] {
    return train_gnn(p.shadow_served, gnn_config(cfg, cfg.shadow_arch), derive_seed(seed, "shadow-train"));
  });

  stage("negative-sample", run, [&] {
    p.train_pairs = build_pair_dataset(p.splits.shadow_train, derive_seed(seed, "negative-sample", 0),
                                       PairSource::ShadowTrain);
    p.test_pairs = build_pair_dataset(p.splits.target_train, derive_seed(seed, "negative-sample", 1),
                                      PairSource::TargetTrain);
    check_attack_provenance(p.train_pairs, p.test_pairs);
    if (cfg.shuffle_labels) {
      Rng rng = make_rng(seed, "label-shuffle");
      shuffle_pair_labels(p.train_pairs, rng);
      shuffle_pair_labels(p.test_pairs, rng);
    }
  });
  return p;
}

/// Query-time part of a defense; graph perturbation happened before training.
FeatureOptions query_options(const ExperimentConfig& cfg, const DefenseConfig& defense, PosteriorMode mode) {
  FeatureOptions o;
  o.defense = defense;
  o.pairwise_ops = cfg.pairwise_ops;
  if (defense.perturbs_graph()) o.defense.kind = DefenseKind::None;
  o.mode = mode;
  return o;
}

struct AttackOutcome {
  MultiInputMlp model;
  std::vector<double> scores;
  double auc = 0.0;
};

AttackOutcome run_attack(const ExperimentConfig& cfg, const AttackSpec& spec, PairFeatureBuilder& train,
                         PairFeatureBuilder& test, const Pipeline& p, std::size_t run) {
  return stage("attack-train", run, [&] {
    const AttackInputs xtr = train.assemble(spec);
    const std::vector<int> ytr = labels_of(p.train_pairs);
    AttackOutcome out;
    out.model = train_attack(spec, xtr, ytr, derive_seed(cfg.seed + run, "attack-train"), cfg.attack_training);
    out.scores = score_pairs(out.model, test.assemble(spec));
    out.auc = auc(out.scores, labels_of(p.test_pairs));
    return out;
  });
}

void save_run_artifacts(const ExperimentConfig& cfg, const Pipeline& p, std::size_t run) {
  if (cfg.artifacts.empty()) return;
  std::filesystem::create_directories(cfg.artifacts);
  const std::string suffix = "_run" + std::to_string(run);
  write_split_manifest(cfg.artifacts / ("splits" + suffix + ".tsv"), p.splits);
  save_checkpoint(cfg.artifacts / ("target" + suffix + ".ckpt"), p.target);
  save_checkpoint(cfg.artifacts / ("shadow" + suffix + ".ckpt"), p.shadow);
}

RunReport execute(const ExperimentConfig& cfg, const ExperimentConfig* shadow_cfg) {
  cfg.validate();
  const Graph graph = stage("load", 0, [&] { return load_source(cfg.dataset); });
  std::optional<Graph> shadow_graph;
  if (shadow_cfg != nullptr && !(shadow_cfg->dataset == cfg.dataset)) {
    shadow_graph = stage("load", 0, [&] { return load_source(shadow_cfg->dataset); });
  }
  const PosteriorMode mode = shadow_cfg != nullptr ? PosteriorMode::Transfer : PosteriorMode::Pairwise;

  RunReport report;
  if (shadow_cfg != nullptr) {
    for (int hop : cfg.hops) {
      for (const AttackSpec& s : attack_table())
        if (s.posteriors && !s.node_attrs && !s.graph_feats && s.hop == hop) report.attacks.push_back(s.id);
    }
  } else {
    report.attacks = cfg.active_attacks();
  }
  report.auc.assign(report.attacks.size(), {});

  for (std::size_t run = 0; run < cfg.runs; ++run) {
    const auto start = std::chrono::steady_clock::now();
    const Pipeline p = prepare_run(cfg, graph, shadow_graph ? &*shadow_graph : nullptr, run, cfg.defense);
    save_run_artifacts(cfg, p, run);
    const FeatureOptions options = query_options(cfg, cfg.defense, mode);
    PairFeatureBuilder train(&p.shadow, p.shadow_served, p.train_pairs.pairs, options);
    PairFeatureBuilder test(&p.target, p.target_served, p.test_pairs.pairs, options);
    for (std::size_t a = 0; a < report.attacks.size(); ++a) {
      const AttackSpec& spec = attack_spec(report.attacks[a]);
      const AttackOutcome outcome = run_attack(cfg, spec, train, test, p, run);
      report.auc[a].push_back(outcome.auc);
      if (!cfg.artifacts.empty()) {
        write_scores_csv(cfg.artifacts / ("scores_" + std::string(spec.name) + "_run" + std::to_string(run) + ".csv"),
                         p.test_pairs.pairs, outcome.scores);
      }
    }
    report.target_accuracy.push_back(stage("evaluate", run, [&] { return node_accuracy(p.target, p.target_test_served); }));
    report.shadow_accuracy.push_back(stage("evaluate", run, [&] { return node_accuracy(p.shadow, p.shadow_test_served); }));
    report.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return report;
}

}  // namespace

Graph load_source(const DatasetSource& source) {
  if (source.is_synthetic()) return generate_planted_partition(source.synthetic, source.data_seed);
  return load_dataset(source.path).graph;
}

ExperimentConfig::ExperimentConfig() {
  for (const AttackSpec& s : attack_table()) attacks.push_back(s.id);
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (!(shadow_fraction > 0.0 && shadow_fraction <= 1.0)) throw std::invalid_argument("shadow_fraction must lie in (0, 1]");
  if (attacks.empty()) throw std::invalid_argument("no attacks selected");
  if (hops.empty()) throw std::invalid_argument("no query depths selected");
  for (int h : hops)
    if (h < 0 || h > 2) throw std::invalid_argument("query depth must be 0, 1 or 2");
  defense.validate();
  if (active_attacks().empty()) throw std::invalid_argument("hop filter removes every selected attack");
}

std::vector<AttackId> ExperimentConfig::active_attacks() const {
  std::vector<AttackId> out;
  for (const AttackSpec& s : attack_table()) {
    if (std::find(attacks.begin(), attacks.end(), s.id) == attacks.end()) continue;
    if (s.hop >= 0 && std::find(hops.begin(), hops.end(), s.hop) == hops.end()) continue;
    out.push_back(s.id);
  }
  return out;
}

StageError::StageError(std::string stage, std::size_t run, const std::string& what)
    : std::runtime_error("[" + stage + ", run " + std::to_string(run) + "] " + what), stage_(std::move(stage)), run_(run) {}

double RunReport::mean_auc(AttackId id) const {
  for (std::size_t a = 0; a < attacks.size(); ++a)
    if (attacks[a] == id) return mean(auc[a]);
  throw std::invalid_argument("attack " + std::string(attack_spec(id).name) + " not in report");
}

double RunReport::mean_target_accuracy() const { return mean(target_accuracy); }
double RunReport::mean_shadow_accuracy() const { return mean(shadow_accuracy); }

RunReport run_experiment(const ExperimentConfig& cfg) { return execute(cfg, nullptr); }

RunReport run_transfer(const ExperimentConfig& target_cfg, const ExperimentConfig& shadow_cfg) {
  return execute(target_cfg, &shadow_cfg);
}

SweepReport run_defense_sweep(const ExperimentConfig& cfg, const std::vector<double>& epsilons) {
  cfg.validate();
  if (!cfg.defense.perturbs_graph()) throw std::invalid_argument("defense sweep needs edgerand or lapgraph");
  if (epsilons.empty()) throw std::invalid_argument("defense sweep needs at least one epsilon");
  const Graph graph = stage("load", 0, [&] { return load_source(cfg.dataset); });
  const AttackSpec& spec = attack_spec(AttackId::A1);

  SweepReport report;
  report.kind = cfg.defense.kind;
  report.attack = spec.id;
  auto evaluate = [&](const DefenseConfig& defense, std::size_t run, SweepRow& row) {
    const Pipeline p = prepare_run(cfg, graph, nullptr, run, defense);
    const FeatureOptions options = query_options(cfg, defense, PosteriorMode::Pairwise);
    PairFeatureBuilder train(&p.shadow, p.shadow_served, p.train_pairs.pairs, options);
    PairFeatureBuilder test(&p.target, p.target_served, p.test_pairs.pairs, options);
    row.attack_auc += run_attack(cfg, spec, train, test, p, run).auc;
    row.target_accuracy += node_accuracy(p.target, p.target_test_served);
    if (defense.kind == DefenseKind::LapGraph) {
      const LapGraphResult lap = lap_graph(PerturbedAdjacency::from_graph(p.splits.target_train), defense.epsilon,
                                           defense.budget_split, derive_seed(cfg.seed + run, "defense", 0));
      row.perturbed_edges += static_cast<double>(lap.adjacency.num_edges());
      if (lap.adjacency.num_edges() != lap.estimated_edges) ++row.estimate_mismatches;
    } else {
      row.perturbed_edges += static_cast<double>(p.target_served.num_edges());
    }
  };
  auto finish = [&](SweepRow& row) {
    const double n = static_cast<double>(cfg.runs);
    row.attack_auc /= n;
    row.target_accuracy /= n;
    row.perturbed_edges /= n;
  };

  SweepRow reference;
  for (std::size_t run = 0; run < cfg.runs; ++run) evaluate(DefenseConfig{}, run, reference);
  finish(reference);
  report.reference_accuracy = reference.target_accuracy;
  report.reference_auc = reference.attack_auc;

  for (double eps : epsilons) {
    DefenseConfig defense = cfg.defense;
    defense.epsilon = eps;
    defense.validate();
    SweepRow row;
    row.epsilon = eps;
    for (std::size_t run = 0; run < cfg.runs; ++run) evaluate(defense, run, row);
    finish(row);
    report.rows.push_back(row);
  }
  return report;
}

AnalysisReport run_analysis(const ExperimentConfig& cfg) {
  cfg.validate();
  const Graph graph = stage("load", 0, [&] { return load_source(cfg.dataset); });
  const Pipeline p = prepare_run(cfg, graph, nullptr, 0, cfg.defense);
  const FeatureOptions options = query_options(cfg, cfg.defense, PosteriorMode::Pairwise);
  PairFeatureBuilder train(&p.shadow, p.shadow_served, p.train_pairs.pairs, options);
  PairFeatureBuilder test(&p.target, p.target_served, p.test_pairs.pairs, options);
  const Graph& g = p.splits.target_train;

  std::vector<std::size_t> positives;
  for (std::size_t i = 0; i < p.test_pairs.pairs.size(); ++i)
    if (p.test_pairs.pairs[i].label == 1) positives.push_back(i);

  const std::vector<std::string> metric_names{"node_similarity", "common_neighbors", "preferential_attachment",
                                              "jaccard"};
  std::vector<std::vector<double>> metric(metric_names.size());
  for (std::size_t i : positives) {
    const LabeledPair& pair = p.test_pairs.pairs[i];
    const FeatureBlock prox = graph_block(g, pair.u, pair.v, 1);
    metric[0].push_back(cosine_similarity(g.features().row(pair.u), g.features().row(pair.v)));
    metric[1].push_back(prox.values[0]);
    metric[2].push_back(prox.values[2]);
    metric[3].push_back(prox.values[1]);
  }

  // Baseline verdicts: node attributes for node similarity, structure otherwise.
  std::map<AttackId, std::vector<int>> decisions;
  std::map<AttackId, std::vector<double>> scores;
  std::vector<AttackId> ids = cfg.active_attacks();
  for (AttackId b : {AttackId::B0, AttackId::B1})
    if (std::find(ids.begin(), ids.end(), b) == ids.end()) ids.push_back(b);
  for (AttackId id : ids) {
    const AttackOutcome outcome = run_attack(cfg, attack_spec(id), train, test, p, 0);
    std::vector<int> dec;
    for (double s : outcome.scores) dec.push_back(s >= 0.5 ? 1 : 0);
    decisions[id] = std::move(dec);
    scores[id] = outcome.scores;
  }

  AnalysisReport report;
  for (AttackId id : cfg.active_attacks()) {
    const std::vector<double>& s = scores[id];
    std::vector<double> pos_scores;
    std::vector<double> neg_scores;
    std::vector<int> attack_dec;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (p.test_pairs.pairs[i].label == 1) {
        pos_scores.push_back(s[i]);
        attack_dec.push_back(decisions[id][i]);
      } else {
        neg_scores.push_back(s[i]);
      }
    }
    for (std::size_t m = 0; m < metric_names.size(); ++m) {
      GroupReport groups = robustness_groups(metric_names[m], pos_scores, metric[m], neg_scores);
      report.pcc.push_back({id, metric_names[m], pearson_correlation(pos_scores, metric[m])});
      if (attack_spec(id).posteriors) {
        const AttackId baseline = m == 0 ? AttackId::B0 : AttackId::B1;
        std::vector<int> base_dec;
        for (std::size_t i : positives) base_dec.push_back(decisions[baseline][i]);
        report.surprising.push_back(
            {id, baseline, metric_names[m], surprising_links(attack_dec, base_dec, groups.members.back())});
      }
      report.groups.emplace_back(id, std::move(groups));
    }
  }

  for (int hop : cfg.hops) {
    std::vector<std::vector<double>> posts;
    for (const auto& [ru, rv] : test.responses(hop)) {
      posts.push_back(ru.values);
      posts.push_back(rv.values);
    }
    for (const CdfPoint& pt : leading_probability_cdf(posts)) report.cdf.push_back({hop, pt});
  }
  return report;
}

void write_run_report(const std::filesystem::path& dir, const RunReport& report) {
  std::filesystem::create_directories(dir);
  std::FILE* f = open_csv(dir / "auc_runs.csv");
  std::fprintf(f, "attack,run,auc\n");
  for (std::size_t a = 0; a < report.attacks.size(); ++a)
    for (std::size_t r = 0; r < report.auc[a].size(); ++r)
      std::fprintf(f, "%s,%zu,%.17g\n", std::string(attack_spec(report.attacks[a]).name).c_str(), r, report.auc[a][r]);
  std::fclose(f);

  f = open_csv(dir / "auc_summary.csv");
  std::fprintf(f, "attack,title,hop,posteriors,node_attrs,graph_feats,mean_auc\n");
  for (AttackId id : report.attacks) {
    const AttackSpec& s = attack_spec(id);
    std::fprintf(f, "%s,%s,%d,%d,%d,%d,%.17g\n", std::string(s.name).c_str(), std::string(s.title).c_str(), s.hop,
                 s.posteriors, s.node_attrs, s.graph_feats, report.mean_auc(id));
  }
  std::fclose(f);

  f = open_csv(dir / "accuracy.csv");
  std::fprintf(f, "run,target_test_accuracy,shadow_test_accuracy\n");
  for (std::size_t r = 0; r < report.runs(); ++r)
    std::fprintf(f, "%zu,%.17g,%.17g\n", r, report.target_accuracy[r], report.shadow_accuracy[r]);
  std::fprintf(f, "mean,%.17g,%.17g\n", report.mean_target_accuracy(), report.mean_shadow_accuracy());
  std::fclose(f);
}

void write_sweep_report(const std::filesystem::path& dir, const SweepReport& report) {
  std::filesystem::create_directories(dir);
  std::FILE* f = open_csv(dir / "defense_sweep.csv");
  std::fprintf(f, "defense,epsilon,target_accuracy,attack_auc,perturbed_edges,estimate_mismatches\n");
  const std::string kind(to_string(report.kind));
  std::fprintf(f, "none,inf,%.17g,%.17g,,\n", report.reference_accuracy, report.reference_auc);
  for (const SweepRow& row : report.rows) {
    std::fprintf(f, "%s,%.17g,%.17g,%.17g,%.17g,%zu\n", kind.c_str(), row.epsilon, row.target_accuracy, row.attack_auc,
                 row.perturbed_edges, row.estimate_mismatches);
  }
  std::fclose(f);
}

void write_analysis_report(const std::filesystem::path& dir, const AnalysisReport& report) {
  std::filesystem::create_directories(dir);
  std::FILE* f = open_csv(dir / "robustness_groups.csv");
  std::fprintf(f, "attack,metric,group,size,metric_high,metric_low,auc\n");
  for (const auto& [id, g] : report.groups)
    for (std::size_t i = 0; i < g.group_auc.size(); ++i)
      std::fprintf(f, "%s,%s,%zu,%zu,%.17g,%.17g,%.17g\n", std::string(attack_spec(id).name).c_str(), g.metric.c_str(),
                   i + 1, g.group_size[i], g.metric_high[i], g.metric_low[i], g.group_auc[i]);
  std::fclose(f);

  f = open_csv(dir / "pcc.csv");
  std::fprintf(f, "attack,metric,pcc\n");
  for (const PccRow& r : report.pcc)
    std::fprintf(f, "%s,%s,%.17g\n", std::string(attack_spec(r.attack).name).c_str(), r.metric.c_str(), r.pcc);
  std::fclose(f);

  f = open_csv(dir / "surprising_links.csv");
  std::fprintf(f, "attack,baseline,metric,last_group,all_positives\n");
  for (const SurprisingRow& r : report.surprising)
    std::fprintf(f, "%s,%s,%s,%.17g,%.17g\n", std::string(attack_spec(r.attack).name).c_str(),
                 std::string(attack_spec(r.baseline).name).c_str(), r.metric.c_str(), r.value.in_group,
                 r.value.overall);
  std::fclose(f);

  f = open_csv(dir / "leading_probability_cdf.csv");
  std::fprintf(f, "hop,leading_probability,cumulative_fraction\n");
  for (const CdfRow& r : report.cdf) std::fprintf(f, "%d,%.17g,%.17g\n", r.hop, r.point.value, r.point.fraction);
  std::fclose(f);
}

}  // namespace linksteal
