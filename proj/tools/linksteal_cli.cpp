// Command line front end: train, attack, sweep, transfer, report.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "linksteal/checkpoint.hpp"
#include "linksteal/experiment.hpp"

namespace {

using namespace linksteal;

struct Options {
  std::string config;
  std::string out = "linksteal_out";
  std::vector<std::string> sets;
  std::optional<std::string> dataset, shadow_dataset, arch, shadow_arch, attack, hop, pairwise_ops, defense, epsilon,
      temperature, shadow_fraction, runs, seed;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key = value configuration file");
  cmd->add_option("--dataset", o.dataset, "dataset directory, or 'synthetic'");
  cmd->add_option("--arch", o.arch, "target model: gcn, sage, gat, gin");
  cmd->add_option("--shadow-arch", o.shadow_arch, "shadow model: gcn, sage, gat, gin");
  cmd->add_option("--attack", o.attack, "comma-separated b0-b2, a0-a9, or 'all'");
  cmd->add_option("--hop", o.hop, "comma-separated query depths to keep (0, 1, 2)");
  cmd->add_option("--pairwise-ops", o.pairwise_ops, "posterior combinations: hadamard, avg, l1, l2, or 'all'");
  cmd->add_option("--defense", o.defense, "none, label, soft, edgerand, lapgraph");
  cmd->add_option("--epsilon", o.epsilon, "privacy budget (sweep: comma-separated list)");
  cmd->add_option("--temperature", o.temperature, "soft posterior temperature");
  cmd->add_option("--shadow-fraction", o.shadow_fraction, "share of the shadow half to keep");
  cmd->add_option("--runs", o.runs, "number of seeded runs");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--set", o.sets, "extra key=value override (repeatable)");
}

ExperimentConfig resolve(const Options& o, bool epsilon_list) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  auto set = [&](const char* key, const std::optional<std::string>& v) {
    if (v) apply_config_entry(cfg, key, *v);
  };
  set("dataset", o.dataset);
  set("shadow_dataset", o.shadow_dataset);
  set("arch", o.arch);
  set("shadow_arch", o.shadow_arch);
  set("attacks", o.attack);
  set("hops", o.hop);
  set("pairwise_ops", o.pairwise_ops);
  set("defense", o.defense);
  set(epsilon_list ? "epsilons" : "epsilon", o.epsilon);
  set("temperature", o.temperature);
  set("shadow_fraction", o.shadow_fraction);
  set("runs", o.runs);
  set("seed", o.seed);
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void save_config(const std::filesystem::path& dir, const ExperimentConfig& cfg) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "config.txt") << config_to_text(cfg);
}

void print_run(const RunReport& r) {
  std::printf("%-10s %-4s %s\n", "attack", "hop", "mean AUC");
  for (AttackId id : r.attacks) {
    const AttackSpec& s = attack_spec(id);
    std::printf("%-10s %-4s %.4f\n", std::string(s.title).c_str(), s.hop < 0 ? "-" : std::to_string(s.hop).c_str(),
                r.mean_auc(id));
  }
  std::printf("target test accuracy %.4f, shadow test accuracy %.4f over %zu run(s)\n", r.mean_target_accuracy(),
              r.mean_shadow_accuracy(), r.runs());
}

int cmd_train(const Options& o) {
  ExperimentConfig cfg = resolve(o, false);
  const std::filesystem::path out = o.out;
  save_config(out, cfg);
  const Graph g = load_source(cfg.dataset);
  const SplitBundle splits = make_splits(g, cfg.seed, cfg.shadow_fraction);
  write_split_manifest(out / "splits.tsv", splits);
  std::FILE* f = std::fopen((out / "accuracy.csv").string().c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot write accuracy.csv");
  std::fprintf(f, "model,arch,train_accuracy,test_accuracy\n");
  const struct {
    const char* name;
    GnnKind arch;
    const Graph& train;
    const Graph& test;
    const char* stream;
  } models[] = {{"target", cfg.target_arch, splits.target_train, splits.target_test, "target-train"},
                {"shadow", cfg.shadow_arch, splits.shadow_train, splits.shadow_test, "shadow-train"}};
  for (const auto& m : models) {
    GnnConfig gc = cfg.gnn;
    gc.kind = m.arch;
    const TrainedGnn model = train_gnn(m.train, gc, derive_seed(cfg.seed, m.stream));
    save_checkpoint(out / (std::string(m.name) + ".ckpt"), model);
    const double train_acc = node_accuracy(model, m.train);
    const double test_acc = node_accuracy(model, m.test);
    std::fprintf(f, "%s,%s,%.17g,%.17g\n", m.name, std::string(to_string(m.arch)).c_str(), train_acc, test_acc);
    std::printf("%s (%s): train accuracy %.4f, test accuracy %.4f\n", m.name, std::string(to_string(m.arch)).c_str(),
                train_acc, test_acc);
  }
  std::fclose(f);
  return 0;
}

int cmd_attack(const Options& o) {
  ExperimentConfig cfg = resolve(o, false);
  const std::filesystem::path out = o.out;
  cfg.artifacts = out / "artifacts";
  save_config(out, cfg);
  const RunReport r = run_experiment(cfg);
  write_run_report(out, r);
  print_run(r);
  return 0;
}

int cmd_sweep(const Options& o) {
  ExperimentConfig cfg = resolve(o, true);
  if (!o.defense) cfg.defense.kind = DefenseKind::EdgeRand;
  save_config(o.out, cfg);
  const SweepReport r = run_defense_sweep(cfg, cfg.epsilons);
  write_sweep_report(o.out, r);
  std::printf("%-8s %-16s %s\n", "epsilon", "target accuracy", "Attack-1 AUC");
  std::printf("%-8s %-16.4f %.4f\n", "none", r.reference_accuracy, r.reference_auc);
  for (const SweepRow& row : r.rows) std::printf("%-8g %-16.4f %.4f\n", row.epsilon, row.target_accuracy, row.attack_auc);
  return 0;
}

int cmd_transfer(const Options& o) {
  const ExperimentConfig cfg = resolve(o, false);
  ExperimentConfig shadow = cfg;
  shadow.dataset = cfg.shadow_dataset;
  save_config(o.out, cfg);
  const RunReport r = run_transfer(cfg, shadow);
  write_run_report(o.out, r);
  print_run(r);
  return 0;
}

int cmd_report(const Options& o) {
  const ExperimentConfig cfg = resolve(o, false);
  save_config(o.out, cfg);
  const AnalysisReport r = run_analysis(cfg);
  write_analysis_report(o.out, r);
  std::printf("wrote robustness groups, correlations, surprising links and CDFs to %s\n", o.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link stealing attacks against inductive GNNs"};
  app.require_subcommand(1);
  Options o;
  struct Verb {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Verb verbs[] = {
      {"train", "train target and shadow models, save checkpoints and split manifest", cmd_train},
      {"attack", "run the shadow-model attack pipeline", cmd_attack},
      {"sweep", "retrain under EdgeRand or LapGraph for a list of privacy budgets", cmd_sweep},
      {"transfer", "attack with a shadow model trained on a different dataset", cmd_transfer},
      {"report", "robustness groups, correlations, surprising links, posterior CDFs", cmd_report},
  };
  std::vector<std::pair<CLI::App*, const Verb*>> commands;
  for (const Verb& v : verbs) {
    CLI::App* cmd = app.add_subcommand(v.name, v.help);
    add_common(cmd, o);
    if (std::string(v.name) == "transfer") {
      cmd->add_option("--shadow-dataset", o.shadow_dataset, "shadow dataset directory, or 'synthetic'");
    }
    commands.emplace_back(cmd, &v);
  }
  CLI11_PARSE(app, argc, argv);
  try {
    for (const auto& [cmd, verb] : commands)
      if (cmd->parsed()) return verb->run(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
