#include "linksteal/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace linksteal {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), nullptr, {}, {}, nullptr, false});
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant_ref(const Tensor& value) {
  nodes_.push_back(Node{{}, &value, {}, {}, nullptr, false});
  return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  if (!p.grad.same_shape(p.value)) p.zero_grad();
  nodes_.push_back(Node{{}, &p.value, {}, {}, &p, true});
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::span<const std::size_t> inputs, BackwardFn fn) {
  bool needs = false;
  for (std::size_t in : inputs) needs = needs || nodes_[in].requires_grad;
  nodes_.push_back(Node{std::move(value), nullptr, {}, needs ? std::move(fn) : BackwardFn{}, nullptr, needs});
  return Var{this, nodes_.size() - 1};
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  const Tensor& v = n.get();
  if (!n.grad.same_shape(v)) n.grad = Tensor(v.rows(), v.cols());
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  const Tensor& val = n.get();
  if (n.grad.same_shape(val)) return n.grad;
  return Tensor(val.rows(), val.cols());
}

void Tape::backward(Var output) {
  if (output.tape != this) throw std::invalid_argument("backward: variable belongs to another tape");
  const Tensor& out = nodes_[output.id].get();
  if (out.rows() != 1 || out.cols() != 1) {
    throw ShapeError("backward requires a 1 x 1 output, got " + shape_string(out));
  }
  for (auto& n : nodes_) n.grad = Tensor();
  grad_buffer(output.id)(0, 0) = 1.0;
  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.grad.same_shape(n.get())) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param != nullptr) {
      auto& g = n.param->grad;
      if (!g.same_shape(n.get())) n.param->zero_grad();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
    }
  }
}

namespace ops {
namespace {

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw std::invalid_argument("operands recorded on different tapes");
}

void accumulate(Tape& t, std::size_t id, const Tensor& delta) {
  if (!t.requires_grad(id)) return;
  Tensor& g = t.grad_buffer(id);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += delta[k];
}

void check_edges(const EdgeIndex& edges, std::size_t rows) {
  if (edges.dst.size() != edges.src.size()) throw ShapeError("edge index src/dst length mismatch");
  if (rows != edges.num_nodes) {
    throw ShapeError("node feature rows " + std::to_string(rows) + " != edge index nodes " +
                     std::to_string(edges.num_nodes));
  }
}

}  // namespace

Var add(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (!x.same_shape(y)) throw ShapeError("add shape mismatch: " + shape_string(x) + " vs " + shape_string(y));
  Tensor out = x;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += y[k];
  const std::size_t in[] = {a.id, b.id};
  return a.tape->record(std::move(out), in, [ia = a.id, ib = b.id](Tape& t, std::size_t self) {
    accumulate(t, ia, t.grad_at(self));
    accumulate(t, ib, t.grad_at(self));
  });
}

Var add_bias(Var x, Var bias) {
  require_same_tape(x, bias);
  const Tensor& v = x.value();
  const Tensor& b = bias.value();
  if (b.rows() != 1 || b.cols() != v.cols()) {
    throw ShapeError("add_bias shape mismatch: " + shape_string(v) + " + " + shape_string(b));
  }
  Tensor out = v;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b(0, j);
  const std::size_t in[] = {x.id, bias.id};
  return x.tape->record(std::move(out), in, [ix = x.id, ib = bias.id](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_at(self);
    accumulate(t, ix, g);
    if (t.requires_grad(ib)) {
      Tensor gb(1, g.cols());
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
      accumulate(t, ib, gb);
    }
  });
}

Var hadamard(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (!x.same_shape(y)) throw ShapeError("hadamard shape mismatch: " + shape_string(x) + " vs " + shape_string(y));
  Tensor out = x;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= y[k];
  const std::size_t in[] = {a.id, b.id};
  return a.tape->record(std::move(out), in, [ia = a.id, ib = b.id](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_at(self);
    const Tensor& x = t.value_at(ia);
    const Tensor& y = t.value_at(ib);
    if (t.requires_grad(ia)) {
      Tensor d = g;
      for (std::size_t k = 0; k < d.size(); ++k) d[k] *= y[k];
      accumulate(t, ia, d);
    }
    if (t.requires_grad(ib)) {
      Tensor d = g;
      for (std::size_t k = 0; k < d.size(); ++k) d[k] *= x[k];
      accumulate(t, ib, d);
    }
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  const std::size_t in[] = {x.id};
  return x.tape->record(std::move(out), in, [ix = x.id, factor](Tape& t, std::size_t self) {
    Tensor d = t.grad_at(self);
    for (double& v : d.data()) v *= factor;
    accumulate(t, ix, d);
  });
}

Var scalar_mul(Var x, Var s) {
  require_same_tape(x, s);
  const Tensor& sv = s.value();
  if (sv.rows() != 1 || sv.cols() != 1) throw ShapeError("scalar_mul expects a 1 x 1 scalar");
  Tensor out = x.value();
  const double c = sv(0, 0);
  for (double& v : out.data()) v *= c;
  const std::size_t in[] = {x.id, s.id};
  return x.tape->record(std::move(out), in, [ix = x.id, is = s.id](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_at(self);
    const double c = t.value_at(is)(0, 0);
    if (t.requires_grad(ix)) {
      Tensor d = g;
      for (double& v : d.data()) v *= c;
      accumulate(t, ix, d);
    }
    if (t.requires_grad(is)) {
      const Tensor& xv = t.value_at(ix);
      double total = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) total += g[k] * xv[k];
      accumulate(t, is, Tensor(1, 1, total));
    }
  });
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  Tensor out = linksteal::matmul(a.value(), b.value());
  const std::size_t in[] = {a.id, b.id};
  return a.tape->record(std::move(out), in, [ia = a.id, ib = b.id](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_at(self);
    if (t.requires_grad(ia)) accumulate(t, ia, matmul_nt(g, t.value_at(ib)));
    if (t.requires_grad(ib)) accumulate(t, ib, matmul_tn(t.value_at(ia), g));
  });
}

Var relu(Var x) { return leaky_relu(x, 0.0); }

Var leaky_relu(Var x, double negative_slope) {
  Tensor out = x.value();
  for (double& v : out.data())
    if (v < 0) v *= negative_slope;
  const std::size_t in[] = {x.id};
  return x.tape->record(std::move(out), in, [ix = x.id, negative_slope](Tape& t, std::size_t self) {
    const Tensor& xv = t.value_at(ix);
    Tensor d = t.grad_at(self);
    for (std::size_t k = 0; k < d.size(); ++k)
      if (xv[k] < 0) d[k] *= negative_slope;
    accumulate(t, ix, d);
  });
}

Var dropout(Var x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) return x;
  const Tensor& xv = x.value();
  auto mask = std::make_shared<Tensor>(xv.rows(), xv.cols());
  std::bernoulli_distribution keep(1.0 - rate);
  const double survivor = 1.0 / (1.0 - rate);
  for (double& m : mask->data()) m = keep(rng) ? survivor : 0.0;
  Tensor out = xv;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= (*mask)[k];
  const std::size_t in[] = {x.id};
  return x.tape->record(std::move(out), in, [ix = x.id, mask](Tape& t, std::size_t self) {
    Tensor d = t.grad_at(self);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] *= (*mask)[k];
    accumulate(t, ix, d);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols needs at least one input");
  Tape* tape = parts.front().tape;
  const std::size_t rows = parts.front().value().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    if (p.tape != tape) throw std::invalid_argument("operands recorded on different tapes");
    if (p.value().rows() != rows) throw ShapeError("concat_cols row mismatch");
    ids.push_back(p.id);
    widths.push_back(p.value().cols());
    cols += p.value().cols();
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(v.row(i).begin(), v.row(i).end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(offset));
    offset += v.cols();
  }
  return tape->record(std::move(out), ids, [ids, widths](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_at(self);
    std::size_t offset = 0;
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (t.requires_grad(ids[p])) {
        Tensor d(g.rows(), widths[p]);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < widths[p]; ++j) d(i, j) = g(i, offset + j);
        accumulate(t, ids[p], d);
      }
      offset += widths[p];
    }
  });
}

Var aggregate(Var x, std::shared_ptr<const EdgeIndex> edges,
              std::shared_ptr<const std::vector<double>> weights) {
  const Tensor& xv = x.value();
  check_edges(*edges, xv.rows());
  if (weights->size() != edges->num_edges()) throw ShapeError("aggregate: one weight per edge required");
  Tensor out(xv.rows(), xv.cols());
  for (std::size_t e = 0; e < edges->num_edges(); ++e) {
    const double w = (*weights)[e];
    auto src = xv.row(static_cast<std::size_t>(edges->src[e]));
    auto dst = out.row(static_cast<std::size_t>(edges->dst[e]));
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
  }
  const std::size_t in[] = {x.id};
  return x.tape->record(std::move(out), in, [ix = x.id, edges, weights](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_at(self);
    Tensor d(g.rows(), g.cols());
    for (std::size_t e = 0; e < edges->num_edges(); ++e) {
      const double w = (*weights)[e];
      auto gd = g.row(static_cast<std::size_t>(edges->dst[e]));
      auto ds = d.row(static_cast<std::size_t>(edges->src[e]));
      for (std::size_t j = 0; j < ds.size(); ++j) ds[j] += w * gd[j];
    }
    accumulate(t, ix, d);
  });
}

Var edge_scores(Var src_scores, Var dst_scores, std::shared_ptr<const EdgeIndex> edges) {
  require_same_tape(src_scores, dst_scores);
  const Tensor& s = src_scores.value();
  const Tensor& r = dst_scores.value();
  if (s.cols() != 1 || r.cols() != 1) throw ShapeError("edge_scores expects n x 1 node scores");
  check_edges(*edges, s.rows());
  check_edges(*edges, r.rows());
  Tensor out(edges->num_edges(), 1);
  for (std::size_t e = 0; e < edges->num_edges(); ++e) {
    out(e, 0) = s(static_cast<std::size_t>(edges->src[e]), 0) + r(static_cast<std::size_t>(edges->dst[e]), 0);
  }
  const std::size_t in[] = {src_scores.id, dst_scores.id};
  return src_scores.tape->record(
      std::move(out), in, [is = src_scores.id, ir = dst_scores.id, edges](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_at(self);
        Tensor ds(edges->num_nodes, 1);
        Tensor dr(edges->num_nodes, 1);
        for (std::size_t e = 0; e < edges->num_edges(); ++e) {
          ds(static_cast<std::size_t>(edges->src[e]), 0) += g(e, 0);
          dr(static_cast<std::size_t>(edges->dst[e]), 0) += g(e, 0);
        }
        accumulate(t, is, ds);
        accumulate(t, ir, dr);
      });
}

Var segment_softmax(Var scores, std::shared_ptr<const EdgeIndex> edges) {
  const Tensor& s = scores.value();
  if (s.cols() != 1 || s.rows() != edges->num_edges()) throw ShapeError("segment_softmax expects E x 1 scores");
  std::vector<double> mx(edges->num_nodes, -std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < edges->num_edges(); ++e) {
    auto d = static_cast<std::size_t>(edges->dst[e]);
    mx[d] = std::max(mx[d], s(e, 0));
  }
  std::vector<double> total(edges->num_nodes, 0.0);
  Tensor out(s.rows(), 1);
  for (std::size_t e = 0; e < edges->num_edges(); ++e) {
    auto d = static_cast<std::size_t>(edges->dst[e]);
    out(e, 0) = std::exp(s(e, 0) - mx[d]);
    total[d] += out(e, 0);
  }
  for (std::size_t e = 0; e < edges->num_edges(); ++e) out(e, 0) /= total[static_cast<std::size_t>(edges->dst[e])];
  const std::size_t in[] = {scores.id};
  return scores.tape->record(std::move(out), in, [is = scores.id, edges](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_at(self);
    const Tensor& a = t.value_at(self);
    // d s_e = a_e * (g_e - sum_{e' in seg} a_e' g_e')
    std::vector<double> seg(edges->num_nodes, 0.0);
    for (std::size_t e = 0; e < edges->num_edges(); ++e)
      seg[static_cast<std::size_t>(edges->dst[e])] += a(e, 0) * g(e, 0);
    Tensor d(a.rows(), 1);
    for (std::size_t e = 0; e < edges->num_edges(); ++e)
      d(e, 0) = a(e, 0) * (g(e, 0) - seg[static_cast<std::size_t>(edges->dst[e])]);
    accumulate(t, is, d);
  });
}

Var edge_weighted_aggregate(Var alpha, Var x, std::shared_ptr<const EdgeIndex> edges) {
  require_same_tape(alpha, x);
  const Tensor& a = alpha.value();
  const Tensor& xv = x.value();
  check_edges(*edges, xv.rows());
  if (a.cols() != 1 || a.rows() != edges->num_edges()) throw ShapeError("edge_weighted_aggregate expects E x 1 weights");
  Tensor out(xv.rows(), xv.cols());
  for (std::size_t e = 0; e < edges->num_edges(); ++e) {
    const double w = a(e, 0);
    auto src = xv.row(static_cast<std::size_t>(edges->src[e]));
    auto dst = out.row(static_cast<std::size_t>(edges->dst[e]));
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
  }
  const std::size_t in[] = {alpha.id, x.id};
  return x.tape->record(std::move(out), in, [ia = alpha.id, ix = x.id, edges](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_at(self);
    const Tensor& a = t.value_at(ia);
    const Tensor& xv = t.value_at(ix);
    if (t.requires_grad(ia)) {
      Tensor da(a.rows(), 1);
      for (std::size_t e = 0; e < edges->num_edges(); ++e) {
        auto gd = g.row(static_cast<std::size_t>(edges->dst[e]));
        auto xs = xv.row(static_cast<std::size_t>(edges->src[e]));
        double acc = 0.0;
        for (std::size_t j = 0; j < gd.size(); ++j) acc += gd[j] * xs[j];
        da(e, 0) = acc;
      }
      accumulate(t, ia, da);
    }
    if (t.requires_grad(ix)) {
      Tensor dx(xv.rows(), xv.cols());
      for (std::size_t e = 0; e < edges->num_edges(); ++e) {
        const double w = a(e, 0);
        auto gd = g.row(static_cast<std::size_t>(edges->dst[e]));
        auto ds = dx.row(static_cast<std::size_t>(edges->src[e]));
        for (std::size_t j = 0; j < ds.size(); ++j) ds[j] += w * gd[j];
      }
      accumulate(t, ix, dx);
    }
  });
}

Var softmax(Var logits, double temperature) {
  Tensor out = softmax_with_temperature(logits.value(), temperature);
  const std::size_t in[] = {logits.id};
  return logits.tape->record(std::move(out), in, [il = logits.id, temperature](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_at(self);
    const Tensor& p = t.value_at(self);
    Tensor d(p.rows(), p.cols());
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < p.cols(); ++j) dot += g(i, j) * p(i, j);
      for (std::size_t j = 0; j < p.cols(); ++j) d(i, j) = p(i, j) * (g(i, j) - dot) / temperature;
    }
    accumulate(t, il, d);
  });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
  const Tensor& z = logits.value();
  if (labels.size() != z.rows()) throw ShapeError("softmax_cross_entropy: one label per row required");
  if (z.rows() == 0) throw std::invalid_argument("softmax_cross_entropy on an empty batch");
  auto probs = std::make_shared<Tensor>(softmax_with_temperature(z, 1.0));
  auto targets = std::make_shared<std::vector<int>>(labels.begin(), labels.end());
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= z.cols()) throw std::out_of_range("class label out of range");
    // log-sum-exp form keeps the loss finite for saturated logits.
    auto row = z.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - mx);
    loss += (mx + std::log(total)) - row[static_cast<std::size_t>(y)];
  }
  loss /= static_cast<double>(z.rows());
  const std::size_t in[] = {logits.id};
  return logits.tape->record(Tensor(1, 1, loss), in, [il = logits.id, probs, targets](Tape& t, std::size_t self) {
    const double g = t.grad_at(self)(0, 0);
    Tensor d = *probs;
    const double n = static_cast<double>(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) d(i, static_cast<std::size_t>((*targets)[i])) -= 1.0;
    for (double& v : d.data()) v *= g / n;
    accumulate(t, il, d);
  });
}

Var dot_const(Var x, const Tensor& weights) {
  const Tensor& xv = x.value();
  if (!xv.same_shape(weights)) throw ShapeError("dot_const shape mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < xv.size(); ++k) total += xv[k] * weights[k];
  const std::size_t in[] = {x.id};
  return x.tape->record(Tensor(1, 1, total), in, [ix = x.id, weights](Tape& t, std::size_t self) {
    Tensor d = weights;
    const double g = t.grad_at(self)(0, 0);
    for (double& v : d.data()) v *= g;
    accumulate(t, ix, d);
  });
}

}  // namespace ops
}  // namespace linksteal
