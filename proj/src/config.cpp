#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "linksteal/experiment.hpp"

namespace linksteal {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string item = trim(text.substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("config key '" + std::string(key) + "': cannot parse '" + s + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  std::string s = trim(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw std::invalid_argument("config key '" + std::string(key) + "': expected a boolean, got '" + s + "'");
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool apply_dataset_entry(DatasetSource& d, std::string_view key, std::string_view value) {
  if (key == "dataset") {
    const std::string v = trim(value);
    d.path = v == "synthetic" ? std::filesystem::path() : std::filesystem::path(v);
  } else if (key == "nodes") {
    d.synthetic.nodes = parse_number<std::size_t>(key, value);
  } else if (key == "communities") {
    d.synthetic.communities = parse_number<std::size_t>(key, value);
  } else if (key == "p_in") {
    d.synthetic.p_in = parse_number<double>(key, value);
  } else if (key == "p_out") {
    d.synthetic.p_out = parse_number<double>(key, value);
  } else if (key == "feature_dim") {
    d.synthetic.feature_dim = parse_number<std::size_t>(key, value);
  } else if (key == "noise") {
    d.synthetic.noise = parse_number<double>(key, value);
  } else if (key == "data_seed") {
    d.data_seed = parse_number<std::uint64_t>(key, value);
  } else {
    return false;
  }
  return true;
}

void dataset_to_text(std::ostringstream& out, const DatasetSource& d, const std::string& prefix) {
  out << prefix << "dataset = " << (d.is_synthetic() ? std::string("synthetic") : d.path.string()) << '\n';
  out << prefix << "nodes = " << d.synthetic.nodes << '\n';
  out << prefix << "communities = " << d.synthetic.communities << '\n';
  out << prefix << "p_in = " << format_double(d.synthetic.p_in) << '\n';
  out << prefix << "p_out = " << format_double(d.synthetic.p_out) << '\n';
  out << prefix << "feature_dim = " << d.synthetic.feature_dim << '\n';
  out << prefix << "noise = " << format_double(d.synthetic.noise) << '\n';
  out << prefix << "data_seed = " << d.data_seed << '\n';
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, std::string_view raw_key, std::string_view value) {
  const std::string key = trim(raw_key);
  if (key.rfind("shadow_", 0) == 0 && apply_dataset_entry(cfg.shadow_dataset, std::string_view(key).substr(7), value)) {
    return;
  }
  if (apply_dataset_entry(cfg.dataset, key, value)) return;

  if (key == "arch" || key == "target_arch") {
    cfg.target_arch = parse_gnn_kind(trim(value));
  } else if (key == "shadow_arch") {
    cfg.shadow_arch = parse_gnn_kind(trim(value));
  } else if (key == "attack" || key == "attacks") {
    cfg.attacks = parse_attack_list(value);
  } else if (key == "hop" || key == "hops") {
    cfg.hops.clear();
    for (const std::string& h : split_list(value)) cfg.hops.push_back(parse_number<int>(key, h));
  } else if (key == "pairwise_ops") {
    cfg.pairwise_ops = parse_pairwise_ops(value);
  } else if (key == "defense") {
    cfg.defense.kind = parse_defense_kind(trim(value));
  } else if (key == "epsilon") {
    cfg.defense.epsilon = parse_number<double>(key, value);
  } else if (key == "epsilons") {
    cfg.epsilons.clear();
    for (const std::string& e : split_list(value)) cfg.epsilons.push_back(parse_number<double>(key, e));
  } else if (key == "temperature") {
    cfg.defense.temperature = parse_number<double>(key, value);
  } else if (key == "budget_split") {
    cfg.defense.budget_split = parse_number<double>(key, value);
  } else if (key == "shadow_fraction") {
    cfg.shadow_fraction = parse_number<double>(key, value);
  } else if (key == "runs") {
    cfg.runs = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "hidden") {
    cfg.gnn.hidden = parse_number<std::size_t>(key, value);
  } else if (key == "gnn_epochs") {
    cfg.gnn.epochs = parse_number<std::size_t>(key, value);
  } else if (key == "gnn_lr") {
    cfg.gnn.learning_rate = parse_number<double>(key, value);
  } else if (key == "gnn_dropout") {
    cfg.gnn.dropout = parse_number<double>(key, value);
  } else if (key == "attack_epochs") {
    cfg.attack_training.epochs = parse_number<std::size_t>(key, value);
  } else if (key == "attack_lr") {
    cfg.attack_training.learning_rate = parse_number<double>(key, value);
  } else if (key == "attack_dropout") {
    cfg.attack_training.dropout = parse_number<double>(key, value);
  } else if (key == "attack_depth") {
    cfg.attack_training.depth = parse_number<std::size_t>(key, value);
  } else if (key == "shuffle_labels") {
    cfg.shuffle_labels = parse_bool(key, value);
  } else if (key == "artifacts") {
    cfg.artifacts = trim(value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_config_entry(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::exception& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  dataset_to_text(out, cfg.dataset, "");
  dataset_to_text(out, cfg.shadow_dataset, "shadow_");
  out << "arch = " << to_string(cfg.target_arch) << '\n';
  out << "shadow_arch = " << to_string(cfg.shadow_arch) << '\n';
  out << "attacks = ";
  for (std::size_t i = 0; i < cfg.attacks.size(); ++i) out << (i ? "," : "") << attack_spec(cfg.attacks[i]).name;
  out << "\nhops = ";
  for (std::size_t i = 0; i < cfg.hops.size(); ++i) out << (i ? "," : "") << cfg.hops[i];
  out << "\npairwise_ops = " << pairwise_ops_to_string(cfg.pairwise_ops);
  out << "\ndefense = " << to_string(cfg.defense.kind) << '\n';
  out << "epsilon = " << format_double(cfg.defense.epsilon) << '\n';
  out << "epsilons = ";
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) out << (i ? "," : "") << format_double(cfg.epsilons[i]);
  out << "\ntemperature = " << format_double(cfg.defense.temperature) << '\n';
  out << "budget_split = " << format_double(cfg.defense.budget_split) << '\n';
  out << "shadow_fraction = " << format_double(cfg.shadow_fraction) << '\n';
  out << "runs = " << cfg.runs << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "hidden = " << cfg.gnn.hidden << '\n';
  out << "gnn_epochs = " << cfg.gnn.epochs << '\n';
  out << "gnn_lr = " << format_double(cfg.gnn.learning_rate) << '\n';
  out << "gnn_dropout = " << format_double(cfg.gnn.dropout) << '\n';
  out << "attack_epochs = " << cfg.attack_training.epochs << '\n';
  out << "attack_lr = " << format_double(cfg.attack_training.learning_rate) << '\n';
  out << "attack_dropout = " << format_double(cfg.attack_training.dropout) << '\n';
  out << "attack_depth = " << cfg.attack_training.depth << '\n';
  out << "shuffle_labels = " << (cfg.shuffle_labels ? "true" : "false") << '\n';
  if (!cfg.artifacts.empty()) out << "artifacts = " << cfg.artifacts.string() << '\n';
  return out.str();
}

}  // namespace linksteal
