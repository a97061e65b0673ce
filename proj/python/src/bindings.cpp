#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>

#include "linksteal/experiment.hpp"

namespace py = pybind11;
using namespace linksteal;

namespace {

ExperimentConfig config_from(const std::map<std::string, std::string>& settings) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : settings) apply_config_entry(cfg, key, value);
  cfg.validate();
  return cfg;
}

py::dict run_report_dict(const RunReport& report) {
  py::dict auc;
  for (std::size_t a = 0; a < report.attacks.size(); ++a)
    auc[py::str(std::string(attack_spec(report.attacks[a]).name))] = report.auc[a];
  py::dict out;
  out["auc"] = auc;
  out["target_accuracy"] = report.target_accuracy;
  out["shadow_accuracy"] = report.shadow_accuracy;
  out["seconds"] = report.seconds;
  return out;
}

}  // namespace

PYBIND11_MODULE(_linksteal, m) {
  m.doc() = "Link-stealing attacks against inductive graph neural networks";

  py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);

  m.def(
      "attack_names", [] {
        std::vector<std::string> names;
        for (const AttackSpec& spec : attack_table()) names.emplace_back(spec.name);
        return names;
      },
      "Baseline and attack identifiers in table order.");

  m.def(
      "config_text", [](const std::map<std::string, std::string>& settings) { return config_to_text(config_from(settings)); },
      py::arg("settings") = std::map<std::string, std::string>{},
      "Full configuration after applying the given key/value settings.");

  m.def(
      "run_experiment",
      [](const std::map<std::string, std::string>& settings, const std::filesystem::path& out_dir) {
        const ExperimentConfig cfg = config_from(settings);
        RunReport report;
        {
          py::gil_scoped_release release;
          report = run_experiment(cfg);
          if (!out_dir.empty()) write_run_report(out_dir, report);
        }
        return run_report_dict(report);
      },
      py::arg("settings"), py::arg("out_dir") = std::filesystem::path(),
      "Runs the shadow-model pipeline; returns per-run AUCs and accuracies.");

  m.def(
      "run_defense_sweep",
      [](const std::map<std::string, std::string>& settings, const std::vector<double>& epsilons) {
        const ExperimentConfig cfg = config_from(settings);
        SweepReport report;
        {
          py::gil_scoped_release release;
          report = run_defense_sweep(cfg, epsilons);
        }
        py::list rows;
        for (const SweepRow& r : report.rows) {
          py::dict row;
          row["epsilon"] = r.epsilon;
          row["target_accuracy"] = r.target_accuracy;
          row["attack_auc"] = r.attack_auc;
          row["perturbed_edges"] = r.perturbed_edges;
          row["estimate_mismatches"] = r.estimate_mismatches;
          rows.append(row);
        }
        py::dict out;
        out["defense"] = std::string(to_string(report.kind));
        out["reference_accuracy"] = report.reference_accuracy;
        out["reference_auc"] = report.reference_auc;
        out["rows"] = rows;
        return out;
      },
      py::arg("settings"), py::arg("epsilons"), "Retrains under each privacy budget and reruns Attack-1.");

  m.def(
      "auc", [](const std::vector<double>& scores, const std::vector<int>& labels) { return auc(scores, labels); },
      py::arg("scores"), py::arg("labels"), "Area under the ROC curve with tied scores counted as one half.");
  m.def(
      "spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman_correlation(x, y); },
      py::arg("x"), py::arg("y"));
  m.def(
      "pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return pearson_correlation(x, y); },
      py::arg("x"), py::arg("y"));
}
