#include "linksteal/attack.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "linksteal/features.hpp"
#include "linksteal/optim.hpp"
#include "linksteal/rng.hpp"

namespace linksteal {

namespace {

constexpr std::array<AttackSpec, 13> kAttackTable{{
    {AttackId::B0, "b0", "Baseline-0", -1, false, true, false},
    {AttackId::B1, "b1", "Baseline-1", -1, false, false, true},
    {AttackId::B2, "b2", "Baseline-2", -1, false, true, true},
    {AttackId::A0, "a0", "Attack-0", 0, true, false, false},
    {AttackId::A1, "a1", "Attack-1", 1, true, false, false},
    {AttackId::A2, "a2", "Attack-2", 2, true, false, false},
    {AttackId::A3, "a3", "Attack-3", 0, true, true, false},
    {AttackId::A4, "a4", "Attack-4", 1, true, true, false},
    {AttackId::A5, "a5", "Attack-5", 2, true, true, false},
    {AttackId::A6, "a6", "Attack-6", 1, true, false, true},
    {AttackId::A7, "a7", "Attack-7", 2, true, false, true},
    {AttackId::A8, "a8", "Attack-8", 1, true, true, true},
    {AttackId::A9, "a9", "Attack-9", 2, true, true, true},
}};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

Tensor stack_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Tensor out(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != out.cols()) throw ShapeError("ragged feature rows");
    std::copy(rows[r].begin(), rows[r].end(), out.row(r).begin());
  }
  return out;
}

std::vector<double> posterior_feature(const DefendedResponse& ru, const DefendedResponse& rv,
                                      const FeatureOptions& options) {
  if (options.mode == PosteriorMode::Transfer) return transfer_block(ru.values, rv.values).values;
  return defended_pair_feature(ru, rv, options.pairwise_ops);
}

std::pair<DefendedResponse, DefendedResponse> query_pair(const TrainedGnn& model, const Graph& g, NodeId u, NodeId v,
                                                         int hop, const DefenseConfig& defense) {
  const QueryContext ctx = make_query_context(g, u, v, hop);
  return {apply_defended_query(model, ctx.u_view, defense), apply_defended_query(model, ctx.v_view, defense)};
}

// Baselines carry no query depth but still read direct neighbourhoods.
int structural_hop(const AttackSpec& spec) { return spec.hop < 0 ? 1 : spec.hop; }

const TrainedGnn& require_model(const TrainedGnn* model, const AttackSpec& spec) {
  if (model == nullptr) throw std::invalid_argument(std::string(spec.title) + " needs a model to query");
  return *model;
}

Tensor dense_forward(const Tensor& x, const Parameter& w, const Parameter& b) {
  if (x.cols() != w.value.rows()) {
    throw ShapeError("attack input has " + std::to_string(x.cols()) + " columns, layer expects " +
                     std::to_string(w.value.rows()));
  }
  Tensor out = matmul(x, w.value);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += b.value[c];
  }
  return out;
}

}  // namespace

std::span<const AttackSpec> attack_table() { return kAttackTable; }

const AttackSpec& attack_spec(AttackId id) {
  for (const AttackSpec& s : kAttackTable)
    if (s.id == id) return s;
  throw std::invalid_argument("unknown attack id");
}

AttackId parse_attack_id(std::string_view name) {
  const std::string key = lower(trim(name));
  for (const AttackSpec& s : kAttackTable)
    if (key == s.name || key == lower(s.title)) return s.id;
  throw std::invalid_argument("unknown attack '" + std::string(name) + "' (expected b0-b2 or a0-a9)");
}

std::vector<AttackId> parse_attack_list(std::string_view text) {
  std::vector<AttackId> out;
  if (lower(trim(text)) == "all") {
    for (const AttackSpec& s : kAttackTable) out.push_back(s.id);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string item = trim(text.substr(start, comma - start));
    if (!item.empty()) {
      const AttackId id = parse_attack_id(item);
      if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty attack list");
  return out;
}

std::string_view to_string(InputKind kind) {
  switch (kind) {
    case InputKind::Posterior: return "posterior";
    case InputKind::NodeAttr: return "node_attr";
    case InputKind::Graph: return "graph";
  }
  return "unknown";
}

const Tensor& AttackInputs::get(InputKind kind) const {
  switch (kind) {
    case InputKind::Posterior: return posterior;
    case InputKind::NodeAttr: return node_attr;
    case InputKind::Graph: return graph;
  }
  throw std::invalid_argument("unknown input kind");
}

Tensor& AttackInputs::get(InputKind kind) {
  return const_cast<Tensor&>(static_cast<const AttackInputs&>(*this).get(kind));
}

std::size_t AttackInputs::rows() const {
  for (const Tensor* t : {&posterior, &node_attr, &graph})
    if (!t->empty()) return t->rows();
  return 0;
}

std::vector<InputKind> AttackInputs::kinds() const {
  std::vector<InputKind> out;
  for (InputKind k : {InputKind::Posterior, InputKind::NodeAttr, InputKind::Graph})
    if (!get(k).empty()) out.push_back(k);
  return out;
}

AttackInputs AttackInputs::row(std::size_t r) const {
  AttackInputs out;
  out.label_only = label_only;
  for (InputKind k : kinds()) out.get(k) = Tensor::row_vector(get(k).row(r));
  return out;
}

AttackInputs assemble_features(const AttackSpec& spec, const TrainedGnn* model, const Graph& g, NodeId u, NodeId v,
                               const FeatureOptions& options) {
  g.check_node(u);
  g.check_node(v);
  if (u == v) throw std::invalid_argument("attack pair needs two distinct nodes");
  AttackInputs out;
  if (spec.posteriors) {
    const auto [ru, rv] = query_pair(require_model(model, spec), g, u, v, spec.hop, options.defense);
    out.posterior = Tensor::row_vector(posterior_feature(ru, rv, options));
    out.label_only = ru.label_only;
  }
  if (spec.node_attrs) out.node_attr = Tensor::row_vector(node_attr_block(g.features().row(u), g.features().row(v)).values);
  if (spec.graph_feats) out.graph = Tensor::row_vector(graph_block(g, u, v, structural_hop(spec)).values);
  return out;
}

PairFeatureBuilder::PairFeatureBuilder(const TrainedGnn* model, const Graph& g, std::span<const LabeledPair> pairs,
                                       FeatureOptions options)
    : model_(model), source_(g), pairs_(pairs.begin(), pairs.end()), options_(options) {
  for (const LabeledPair& p : pairs_) {
    g.check_node(p.u);
    g.check_node(p.v);
    if (p.u == p.v) throw std::invalid_argument("attack pair needs two distinct nodes");
  }
}

const std::vector<std::pair<DefendedResponse, DefendedResponse>>& PairFeatureBuilder::responses(int hop) {
  auto it = responses_.find(hop);
  if (it != responses_.end()) return it->second;
  if (model_ == nullptr) throw std::invalid_argument("posterior features need a model to query");

  // Excluding a non-edge leaves both subgraphs unchanged, so answers for
  // non-adjacent pairs come from a per-node cache.
  std::unordered_map<NodeId, DefendedResponse> plain;
  auto plain_response = [&](NodeId x) -> const DefendedResponse& {
    auto found = plain.find(x);
    if (found == plain.end()) {
      found = plain.emplace(x, apply_defended_query(*model_, khop_subgraph(source_, x, hop), options_.defense)).first;
    }
    return found->second;
  };

  std::vector<std::pair<DefendedResponse, DefendedResponse>> out;
  out.reserve(pairs_.size());
  for (const LabeledPair& p : pairs_) {
    if (source_.has_edge(p.u, p.v)) {
      out.push_back(query_pair(*model_, source_, p.u, p.v, hop, options_.defense));
    } else {
      out.emplace_back(plain_response(p.u), plain_response(p.v));
    }
  }
  return responses_.emplace(hop, std::move(out)).first->second;
}

AttackInputs PairFeatureBuilder::assemble(const AttackSpec& spec) {
  AttackInputs out;
  if (spec.posteriors) {
    auto it = posterior_.find(spec.hop);
    if (it == posterior_.end()) {
      std::vector<std::vector<double>> rows;
      rows.reserve(pairs_.size());
      for (const auto& [ru, rv] : responses(spec.hop)) rows.push_back(posterior_feature(ru, rv, options_));
      it = posterior_.emplace(spec.hop, stack_rows(rows)).first;
    }
    out.posterior = it->second;
    out.label_only = options_.defense.kind == DefenseKind::LabelOnly;
  }
  if (spec.node_attrs) {
    if (!node_attr_) {
      std::vector<std::vector<double>> rows;
      for (const LabeledPair& p : pairs_)
        rows.push_back(node_attr_block(source_.features().row(p.u), source_.features().row(p.v)).values);
      node_attr_ = stack_rows(rows);
    }
    out.node_attr = *node_attr_;
  }
  if (spec.graph_feats) {
    // Proximity is measured on direct neighbourhoods for both query depths.
    if (!proximity_) {
      std::vector<std::vector<double>> rows;
      for (const LabeledPair& p : pairs_) rows.push_back(graph_block(source_, p.u, p.v, structural_hop(spec)).values);
      proximity_ = stack_rows(rows);
    }
    out.graph = *proximity_;
  }
  return out;
}

std::vector<BranchLayout> attack_architecture(AttackId id, std::size_t depth) {
  using K = InputKind;
  const bool posterior_only = id == AttackId::A0 || id == AttackId::A1 || id == AttackId::A2;
  if (depth != 0) {
    if (!posterior_only) throw std::invalid_argument("depth override applies to the posterior-only attacks");
    static const std::vector<std::size_t> kWidths{128, 64, 32, 16};
    switch (depth) {
      case 2: return {{K::Posterior, {128}}};
      case 3: return {{K::Posterior, {128, 32}}};
      case 4: return {{K::Posterior, {128, 64, 32}}};
      case 5: return {{K::Posterior, kWidths}};
      default: throw std::invalid_argument("attack depth must be between 2 and 5");
    }
  }
  switch (id) {
    case AttackId::B0: return {{K::NodeAttr, {128, 32}}};
    case AttackId::B1: return {{K::Graph, {16}}};
    case AttackId::B2: return {{K::NodeAttr, {256, 64, 8}}, {K::Graph, {1}}};
    case AttackId::A0:
    case AttackId::A1:
    case AttackId::A2: return {{K::Posterior, {128, 32}}};
    case AttackId::A3:
    case AttackId::A4:
    case AttackId::A5: return {{K::NodeAttr, {128, 64, 16}}, {K::Posterior, {64, 16}}};
    case AttackId::A6:
    case AttackId::A7: return {{K::Graph, {16, 4}}, {K::Posterior, {128, 64, 16}}};
    case AttackId::A8:
    case AttackId::A9: return {{K::NodeAttr, {128, 64, 16}}, {K::Posterior, {128, 64, 16}}, {K::Graph, {4}}};
  }
  throw std::invalid_argument("unknown attack id");
}

std::vector<Parameter*> MultiInputMlp::parameters() {
  std::vector<Parameter*> out;
  for (MlpBranch& b : branches)
    for (Parameter& p : b.params) out.push_back(&p);
  out.push_back(&head_weight);
  out.push_back(&head_bias);
  return out;
}

std::size_t MultiInputMlp::embedding_dim() const {
  std::size_t total = 0;
  for (const MlpBranch& b : branches) total += b.widths.back();
  return total;
}

Var MultiInputMlp::forward(Tape& tape, const AttackInputs& inputs, bool training, Rng& rng) {
  std::vector<Var> embeddings;
  for (MlpBranch& b : branches) {
    const Tensor& x = inputs.get(b.input);
    if (x.cols() != b.in_dim) {
      throw ShapeError(std::string(to_string(b.input)) + " input has " + std::to_string(x.cols()) +
                       " columns, attack model expects " + std::to_string(b.in_dim));
    }
    Var h = tape.constant_ref(x);
    for (std::size_t l = 0; l < b.widths.size(); ++l) {
      h = ops::add_bias(ops::matmul(h, tape.parameter(b.params[2 * l])), tape.parameter(b.params[2 * l + 1]));
      h = ops::dropout(ops::relu(h), dropout, training, rng);
    }
    embeddings.push_back(h);
  }
  Var joint = embeddings.size() == 1 ? embeddings.front() : ops::concat_cols(embeddings);
  return ops::add_bias(ops::matmul(joint, tape.parameter(head_weight)), tape.parameter(head_bias));
}

Tensor MultiInputMlp::logits(const AttackInputs& inputs) const {
  std::vector<Tensor> embeddings;
  std::size_t rows = 0;
  for (const MlpBranch& b : branches) {
    Tensor h = inputs.get(b.input);
    if (h.empty()) throw ShapeError(std::string(to_string(b.input)) + " input missing for attack model");
    for (std::size_t l = 0; l < b.widths.size(); ++l) {
      h = dense_forward(h, b.params[2 * l], b.params[2 * l + 1]);
      for (double& x : h.data()) x = std::max(x, 0.0);
    }
    rows = h.rows();
    embeddings.push_back(std::move(h));
  }
  Tensor joint(rows, embedding_dim());
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t offset = 0;
    for (const Tensor& e : embeddings) {
      std::copy(e.row(r).begin(), e.row(r).end(), joint.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
      offset += e.cols();
    }
  }
  return dense_forward(joint, head_weight, head_bias);
}

MultiInputMlp init_attack_model(AttackId id, const AttackInputs& shapes, std::size_t depth, Rng& rng) {
  MultiInputMlp model;
  model.attack = id;
  for (const BranchLayout& layout : attack_architecture(id, depth)) {
    MlpBranch b;
    b.input = layout.input;
    b.in_dim = shapes.get(layout.input).cols();
    if (b.in_dim == 0) throw ShapeError(std::string(to_string(layout.input)) + " input missing for attack model");
    b.widths = layout.widths;
    std::size_t fan_in = b.in_dim;
    for (std::size_t w : b.widths) {
      b.params.emplace_back(glorot_uniform(fan_in, w, rng));
      b.params.emplace_back(Tensor(1, w));
      fan_in = w;
    }
    model.branches.push_back(std::move(b));
  }
  model.head_weight = Parameter(glorot_uniform(model.embedding_dim(), 2, rng));
  model.head_bias = Parameter(Tensor(1, 2));
  return model;
}

MultiInputMlp train_attack(const AttackSpec& spec, const AttackInputs& inputs, std::span<const int> labels,
                           std::uint64_t seed, const AttackTrainConfig& config) {
  const std::size_t n = inputs.rows();
  if (n == 0) throw std::invalid_argument("attack training set is empty");
  if (labels.size() != n) throw ShapeError("attack labels do not match the feature rows");
  for (int l : labels)
    if (l != 0 && l != 1) throw std::invalid_argument("attack labels must be 0 or 1");
  if (config.epochs == 0) throw std::invalid_argument("attack training needs at least one epoch");

  Rng init = make_rng(seed, "attack-init", static_cast<std::uint64_t>(spec.id));
  Rng drop = make_rng(seed, "attack-dropout", static_cast<std::uint64_t>(spec.id));
  MultiInputMlp model = init_attack_model(spec.id, inputs, config.depth, init);
  model.dropout = config.dropout;
  std::vector<Parameter*> params = model.parameters();
  OptimizerState opt;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    opt.learning_rate = cosine_anneal(config.learning_rate, epoch, config.epochs);
    Tape tape;
    Var z = model.forward(tape, inputs, true, drop);
    Var loss = ops::softmax_cross_entropy(z, labels);
    tape.backward(loss);
    optimizer_step(opt, params);
  }
  return model;
}

LinkVerdict verdict_from_logits(double no_link, double link) {
  const Tensor p = softmax_with_temperature(Tensor(1, 2, std::vector<double>{no_link, link}), 1.0);
  return {p[1], p[1] >= 0.5};
}

LinkVerdict infer_link(const MultiInputMlp& model, const AttackInputs& inputs) {
  if (inputs.rows() != 1) throw ShapeError("infer_link expects a single pair");
  const Tensor z = model.logits(inputs);
  return verdict_from_logits(z(0, 0), z(0, 1));
}

std::vector<double> score_pairs(const MultiInputMlp& model, const AttackInputs& inputs) {
  const Tensor z = model.logits(inputs);
  std::vector<double> out(z.rows());
  for (std::size_t r = 0; r < z.rows(); ++r) out[r] = verdict_from_logits(z(r, 0), z(r, 1)).score;
  return out;
}

void write_scores_csv(const std::filesystem::path& path, std::span<const LabeledPair> pairs,
                      std::span<const double> scores) {
  if (pairs.size() != scores.size()) throw ShapeError("scores do not match pairs");
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot write " + path.string());
  std::fprintf(f, "u,v,label,score\n");
  for (std::size_t i = 0; i < pairs.size(); ++i)
    std::fprintf(f, "%d,%d,%d,%.17g\n", pairs[i].u, pairs[i].v, pairs[i].label, scores[i]);
  std::fclose(f);
}

void write_features_csv(const std::filesystem::path& path, std::span<const LabeledPair> pairs,
                        const AttackInputs& inputs, PosteriorMode mode, PairwiseOpSet ops) {
  if (inputs.rows() != pairs.size()) throw ShapeError("feature rows do not match pairs");
  std::vector<std::string> header{"u", "v", "label"};
  for (InputKind k : inputs.kinds()) {
    const std::size_t width = inputs.get(k).cols();
    std::vector<std::string> names;
    if (k == InputKind::Posterior && inputs.label_only) {
      for (std::size_t i = 0; i < width; ++i) names.push_back("label_sum_" + std::to_string(i));
    } else if (k == InputKind::Posterior) {
      names = block_header(mode == PosteriorMode::Transfer ? BlockKind::Transfer : BlockKind::Posterior, width, ops);
    } else {
      names = block_header(k == InputKind::NodeAttr ? BlockKind::NodeAttr : BlockKind::Graph, width);
    }
    header.insert(header.end(), names.begin(), names.end());
  }
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) std::fprintf(f, "%s%s", i ? "," : "", header[i].c_str());
  std::fprintf(f, "\n");
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    std::fprintf(f, "%d,%d,%d", pairs[r].u, pairs[r].v, pairs[r].label);
    for (InputKind k : inputs.kinds())
      for (double x : inputs.get(k).row(r)) std::fprintf(f, ",%.17g", x);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace linksteal
