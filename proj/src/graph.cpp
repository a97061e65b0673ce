#include "linksteal/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace linksteal {

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges, Tensor features, std::vector<int> labels,
             std::size_t num_classes)
    : num_nodes_(num_nodes), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() != num_nodes_) {
    throw GraphError("features have " + std::to_string(features_.rows()) + " rows for " +
                     std::to_string(num_nodes_) + " nodes");
  }
  if (labels_.size() != num_nodes_) {
    throw GraphError("labels have " + std::to_string(labels_.size()) + " entries for " +
                     std::to_string(num_nodes_) + " nodes");
  }
  int max_label = -1;
  for (int y : labels_) {
    if (y < 0) throw GraphError("negative class label");
    max_label = std::max(max_label, y);
  }
  num_classes_ = num_classes == 0 ? static_cast<std::size_t>(max_label + 1) : num_classes;
  if (max_label >= 0 && static_cast<std::size_t>(max_label) >= num_classes_) {
    throw GraphError("label " + std::to_string(max_label) + " outside " + std::to_string(num_classes_) + " classes");
  }

  for (Edge& e : edges) {
    e = Edge(e.u, e.v);
    if (!valid(e.u) || !valid(e.v)) {
      throw GraphError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ") references an invalid node");
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  std::vector<std::size_t> deg(num_nodes_, 0);
  for (const Edge& e : edges_) {
    ++deg[static_cast<std::size_t>(e.u)];
    if (!e.is_self_loop()) ++deg[static_cast<std::size_t>(e.v)];
  }
  offsets_.assign(num_nodes_ + 1, 0);
  for (std::size_t i = 0; i < num_nodes_; ++i) offsets_[i + 1] = offsets_[i] + deg[i];
  neighbors_.assign(offsets_.back(), 0);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    neighbors_[cursor[static_cast<std::size_t>(e.u)]++] = e.v;
    if (!e.is_self_loop()) neighbors_[cursor[static_cast<std::size_t>(e.v)]++] = e.u;
  }
  for (std::size_t i = 0; i < num_nodes_; ++i) {
    std::sort(neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
  }
}

std::span<const NodeId> Graph::adjacency(NodeId v) const {
  check_node(v);
  const auto i = static_cast<std::size_t>(v);
  return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  auto adj = adjacency(a);
  check_node(b);
  return std::binary_search(adj.begin(), adj.end(), b);
}

void Graph::check_node(NodeId v) const {
  if (!valid(v)) {
    throw GraphError("node id " + std::to_string(v) + " outside [0, " + std::to_string(num_nodes_) + ")");
  }
}

Graph Graph::with_edges(std::vector<Edge> edges) const {
  return Graph(num_nodes_, std::move(edges), features_, labels_, num_classes_);
}

std::vector<NodeId> neighbors(const Graph& g, NodeId v) {
  auto adj = g.adjacency(v);
  return {adj.begin(), adj.end()};
}

int Subgraph::local_index(NodeId parent) const {
  auto it = std::find(nodes.begin(), nodes.end(), parent);
  return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
}

std::vector<Edge> Subgraph::proper_edges() const {
  std::vector<Edge> out;
  for (const Edge& e : edges)
    if (!e.is_self_loop()) out.push_back(e);
  return out;
}

Subgraph khop_subgraph(const Graph& g, NodeId v, int k, std::optional<Edge> exclude) {
  g.check_node(v);
  if (k < 0 || k > 2) throw std::invalid_argument("hop count must be 0, 1 or 2");
  if (exclude) {
    exclude = Edge(exclude->u, exclude->v);
    g.check_node(exclude->u);
    g.check_node(exclude->v);
  }
  auto blocked = [&](NodeId a, NodeId b) { return exclude && *exclude == Edge(a, b); };

  Subgraph sub;
  sub.center = v;
  sub.hop = k;
  sub.excluded = exclude;

  std::unordered_map<NodeId, int> depth;
  depth.emplace(v, 0);
  sub.nodes.push_back(v);
  std::deque<NodeId> queue{v};
  while (!queue.empty()) {
    const NodeId x = queue.front();
    queue.pop_front();
    const int d = depth.at(x);
    if (d == k) continue;
    for (NodeId y : g.adjacency(x)) {
      if (y == x || blocked(x, y) || depth.contains(y)) continue;
      depth.emplace(y, d + 1);
      sub.nodes.push_back(y);
      queue.push_back(y);
    }
  }

  for (NodeId x : sub.nodes) {
    sub.edges.emplace_back(x, x);
    for (NodeId y : g.adjacency(x)) {
      if (y > x && depth.contains(y) && !blocked(x, y)) sub.edges.emplace_back(x, y);
    }
  }
  std::sort(sub.edges.begin(), sub.edges.end());
  sub.feature_view = gather_rows(g.features(), sub.nodes);
  return sub;
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  std::unordered_map<NodeId, NodeId> local;
  local.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    g.check_node(nodes[i]);
    if (!local.emplace(nodes[i], static_cast<NodeId>(i)).second) {
      throw GraphError("induced_subgraph: duplicate node " + std::to_string(nodes[i]));
    }
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (NodeId y : g.adjacency(nodes[i])) {
      auto it = local.find(y);
      if (it != local.end() && it->second >= static_cast<NodeId>(i)) {
        edges.emplace_back(static_cast<NodeId>(i), it->second);
      }
    }
  }
  std::vector<int> labels;
  labels.reserve(nodes.size());
  for (NodeId x : nodes) labels.push_back(g.labels()[static_cast<std::size_t>(x)]);
  return Graph(nodes.size(), std::move(edges), gather_rows(g.features(), nodes), std::move(labels),
               g.num_classes());
}

namespace {

bool skip_line(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

double parse_double(std::string_view token, const std::string& where) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) token.remove_suffix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw GraphError("cannot parse number '" + std::string(token) + "' in " + where);
  }
  return value;
}

}  // namespace

LoadedDataset load_dataset(const std::filesystem::path& dir) {
  const auto features_path = dir / "features.csv";
  const auto labels_path = dir / "labels.csv";
  const auto edges_path = dir / "edges.tsv";
  for (const auto& p : {features_path, labels_path, edges_path}) {
    if (!std::filesystem::exists(p)) throw GraphError("missing dataset file " + p.string());
  }

  std::vector<std::vector<double>> rows;
  {
    std::ifstream in(features_path);
    std::string line;
    while (std::getline(in, line)) {
      if (skip_line(line)) continue;
      std::vector<double> row;
      std::string_view rest(line);
      while (true) {
        auto comma = rest.find(',');
        row.push_back(parse_double(rest.substr(0, comma), features_path.string()));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw GraphError("features.csv row " + std::to_string(rows.size()) + " has " + std::to_string(row.size()) +
                         " columns, expected " + std::to_string(rows.front().size()));
      }
      rows.push_back(std::move(row));
    }
  }
  const std::size_t n = rows.size();
  const std::size_t d = n == 0 ? 0 : rows.front().size();
  Tensor features(n, d);
  for (std::size_t i = 0; i < n; ++i) std::copy(rows[i].begin(), rows[i].end(), features.row(i).begin());

  std::vector<int> labels;
  {
    std::ifstream in(labels_path);
    std::string line;
    while (std::getline(in, line)) {
      if (skip_line(line)) continue;
      labels.push_back(static_cast<int>(parse_double(line, labels_path.string())));
    }
  }
  if (labels.size() != n) {
    throw GraphError("labels.csv has " + std::to_string(labels.size()) + " entries but features.csv has " +
                     std::to_string(n) + " rows");
  }

  LoadedDataset out;
  std::unordered_map<std::string, NodeId> index;
  const auto nodes_path = dir / "nodes.txt";
  if (std::filesystem::exists(nodes_path)) {
    std::ifstream in(nodes_path);
    std::string line;
    while (std::getline(in, line)) {
      if (skip_line(line)) continue;
      std::istringstream ss(line);
      std::string id;
      ss >> id;
      if (!index.emplace(id, static_cast<NodeId>(out.external_ids.size())).second) {
        throw GraphError("duplicate external id " + id + " in nodes.txt");
      }
      out.external_ids.push_back(id);
    }
    if (out.external_ids.size() != n) throw GraphError("nodes.txt length does not match features.csv");
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out.external_ids.push_back(std::to_string(i));
      index.emplace(out.external_ids.back(), static_cast<NodeId>(i));
    }
  }

  std::vector<Edge> edges;
  {
    std::ifstream in(edges_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (skip_line(line)) continue;
      std::istringstream ss(line);
      std::string a, b;
      if (!(ss >> a >> b)) throw GraphError("edges.tsv line " + std::to_string(line_no) + " needs two columns");
      auto ia = index.find(a);
      auto ib = index.find(b);
      if (ia == index.end() || ib == index.end()) {
        throw GraphError("edges.tsv line " + std::to_string(line_no) + " references an unknown node");
      }
      if (ia->second != ib->second) edges.emplace_back(ia->second, ib->second);
    }
  }
  out.graph = Graph(n, std::move(edges), std::move(features), std::move(labels));
  return out;
}

void save_dataset(const std::filesystem::path& dir, const Graph& g) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "edges.tsv");
    for (const Edge& e : g.edges()) out << e.u << '\t' << e.v << '\n';
  }
  {
    std::ofstream out(dir / "features.csv");
    char buf[32];
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      auto row = g.features().row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", row[j]);
        out << (j ? "," : "") << buf;
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.csv");
    for (int y : g.labels()) out << y << '\n';
  }
}

}  // namespace linksteal
