#include "gzf/autodiff.hpp"

#include <atomic>
#include <cmath>
#include <string>

namespace gzf {

namespace {

std::atomic<bool> g_backward_fault{false};

[[noreturn]] void shape_mismatch(std::string_view op, const Matrix& a, const Matrix& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.rows(), a.cols()) +
                       " and " + shape_string(b.rows(), b.cols()));
}

Graph& same_graph(Var a, Var b) {
  if (&a.graph() != &b.graph()) throw GraphError("operands belong to different graphs");
  return a.graph();
}

}  // namespace

namespace debug {
void set_backward_fault(bool enabled) { g_backward_fault = enabled; }
bool backward_fault() { return g_backward_fault; }
}  // namespace debug

const Matrix& Var::value() const { return graph_->value(id_); }

const Matrix& Graph::value(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.external ? *n.external : n.value;
}

Var Graph::constant(Matrix value) {
  if (!value.allFinite()) throw NumericError("constant: non-finite input");
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Graph::param(const Tensor& t) {
  const Matrix* key = &t.matrix();
  if (auto it = params_.find(key); it != params_.end()) return Var(this, it->second);
  if (!key->allFinite()) throw NumericError("param: non-finite parameter value");
  Node n;
  n.external = key;
  n.needs_grad = true;
  n.is_param = true;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size() - 1);
  params_.emplace(key, id);
  return Var(this, id);
}

Var Graph::record(std::string_view op, Matrix value, std::span<const Var> inputs, BackwardFn fn) {
  if (!value.allFinite()) throw NumericError(std::string(op) + ": produced non-finite values");
  Node n;
  n.value = std::move(value);
  for (const Var& in : inputs) {
    if (&in.graph() != this) throw GraphError(std::string(op) + ": operand from another graph");
    n.needs_grad = n.needs_grad || needs_grad(in.id());
  }
  if (n.needs_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Graph::backward(Var loss) {
  if (&loss.graph() != this) throw GraphError("backward: loss from another graph");
  if (backward_done_) throw GraphError("backward: graph already consumed; record a new forward pass");
  const Matrix& lv = loss.value();
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw DimensionError("backward: loss must be scalar, got " + shape_string(lv.rows(), lv.cols()));
  }
  if (!needs_grad(loss.id())) throw GraphError("backward: loss is detached from every parameter");
  backward_done_ = true;
  nodes_[static_cast<std::size_t>(loss.id())].grad = Matrix::Ones(1, 1);
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.backward && n.grad.size() != 0) n.backward(*this, id);
  }
}

const Matrix* Graph::grad(const Tensor& t) const {
  auto it = params_.find(&t.matrix());
  if (it == params_.end()) return nullptr;
  const Node& n = nodes_[static_cast<std::size_t>(it->second)];
  return n.grad.size() ? &n.grad : nullptr;
}

Matrix Graph::grad_or_zero(const Tensor& t) const {
  if (const Matrix* g = grad(t)) return *g;
  return Matrix::Zero(t.matrix().rows(), t.matrix().cols());
}

const Matrix* Graph::node_grad(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id())];
  return n.grad.size() ? &n.grad : nullptr;
}

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) shape_mismatch("matmul", av, bv);
  Matrix out = av * bv;
  const int ia = a.id(), ib = b.id();
  return g.record("matmul", std::move(out), {a, b}, [ia, ib](Graph& gr, int self) {
    const Matrix& d = gr.out_grad(self);
    if (gr.needs_grad(ia)) gr.accumulate(ia, d * gr.value(ib).transpose());
    if (gr.needs_grad(ib)) gr.accumulate(ib, gr.value(ia).transpose() * d);
  });
}

Var matmul_nt(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.cols()) shape_mismatch("matmul_nt", av, bv);
  Matrix out = av * bv.transpose();
  const int ia = a.id(), ib = b.id();
  return g.record("matmul_nt", std::move(out), {a, b}, [ia, ib](Graph& gr, int self) {
    const Matrix& d = gr.out_grad(self);
    if (gr.needs_grad(ia)) gr.accumulate(ia, d * gr.value(ib));
    if (gr.needs_grad(ib)) gr.accumulate(ib, d.transpose() * gr.value(ia));
  });
}

Var add(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_mismatch("add", av, bv);
  Matrix out = av + bv;
  const int ia = a.id(), ib = b.id();
  return g.record("add", std::move(out), {a, b}, [ia, ib](Graph& gr, int self) {
    const Matrix& d = gr.out_grad(self);
    gr.accumulate(ia, d);
    gr.accumulate(ib, d);
  });
}

Var add_bias(Var x, Var bias) {
  Graph& g = same_graph(x, bias);
  const Matrix& xv = x.value();
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) shape_mismatch("add_bias", xv, bv);
  Matrix out = xv.rowwise() + bv.row(0);
  const int ix = x.id(), ib = bias.id();
  return g.record("add_bias", std::move(out), {x, bias}, [ix, ib](Graph& gr, int self) {
    const Matrix& d = gr.out_grad(self);
    gr.accumulate(ix, d);
    if (gr.needs_grad(ib)) gr.accumulate(ib, d.colwise().sum());
  });
}

Var linear(Var x, Var weight, Var bias) { return add_bias(matmul_nt(x, weight), bias); }

Var mul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_mismatch("mul", av, bv);
  Matrix out = av.cwiseProduct(bv);
  const int ia = a.id(), ib = b.id();
  return g.record("mul", std::move(out), {a, b}, [ia, ib](Graph& gr, int self) {
    const Matrix& d = gr.out_grad(self);
    if (gr.needs_grad(ia)) gr.accumulate(ia, d.cwiseProduct(gr.value(ib)));
    if (gr.needs_grad(ib)) gr.accumulate(ib, d.cwiseProduct(gr.value(ia)));
  });
}

Var scale(Var x, double s) {
  Matrix out = x.value() * s;
  const int ix = x.id();
  return x.graph().record("scale", std::move(out), {x}, [ix, s](Graph& gr, int self) {
    gr.accumulate(ix, gr.out_grad(self) * s);
  });
}

Var relu(Var x) {
  Matrix out = x.value().cwiseMax(0.0);
  const int ix = x.id();
  return x.graph().record("relu", std::move(out), {x}, [ix](Graph& gr, int self) {
    const Matrix& d = gr.out_grad(self);
    gr.accumulate(ix, (gr.value(ix).array() > 0.0).select(d, 0.0));
  });
}

Var softmax_rows(Var x) {
  Matrix out = softmax_rows(x.value());
  const int ix = x.id();
  return x.graph().record("softmax_rows", std::move(out), {x}, [ix](Graph& gr, int self) {
    const Matrix& d = gr.out_grad(self);
    const Matrix& y = gr.value(self);
    const Eigen::VectorXd dots = d.cwiseProduct(y).rowwise().sum();
    gr.accumulate(ix, y.cwiseProduct(d - dots.replicate(1, d.cols())));
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  Graph& g = same_graph(x, gamma);
  const Matrix& xv = x.value();
  if (gamma.value().size() != xv.cols() || beta.value().size() != xv.cols()) {
    shape_mismatch("layer_norm", xv, gamma.value());
  }
  if (!(eps > 0.0)) throw ConfigError("layer_norm: eps must be positive");
  Matrix xhat;
  Eigen::VectorXd inv_std;
  Matrix out = layer_norm_rows(xv, gamma.value(), beta.value(), eps, &xhat, &inv_std);
  const int ix = x.id(), ig = gamma.id(), ib = beta.id();
  return g.record("layer_norm", std::move(out), {x, gamma, beta},
                  [ix, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& gr, int self) {
                    const Matrix& d = gr.out_grad(self);
                    const Matrix& gv = gr.value(ig);
                    if (gr.needs_grad(ig)) {
                      Matrix dg = d.cwiseProduct(xhat).colwise().sum();
                      if (debug::backward_fault()) dg *= 1.05;
                      gr.accumulate(ig, dg);
                    }
                    if (gr.needs_grad(ib)) gr.accumulate(ib, d.colwise().sum());
                    if (gr.needs_grad(ix)) {
                      const double c = static_cast<double>(d.cols());
                      Matrix dxhat = d.array().rowwise() * gv.row(0).array();
                      const Eigen::VectorXd s1 = dxhat.rowwise().sum();
                      const Eigen::VectorXd s2 = dxhat.cwiseProduct(xhat).rowwise().sum();
                      Matrix dx = (c * dxhat - s1.replicate(1, d.cols()) -
                                   xhat.cwiseProduct(s2.replicate(1, d.cols()))) /
                                  c;
                      dx.array().colwise() *= inv_std.array();
                      gr.accumulate(ix, dx);
                    }
                  });
}

Var dropout(Var x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout: rate must lie in [0, 1)");
  if (!training || rate == 0.0) return x;
  const Matrix& xv = x.value();
  std::bernoulli_distribution keep(1.0 - rate);
  const double s = 1.0 / (1.0 - rate);
  Matrix mask(xv.rows(), xv.cols());
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? s : 0.0;
  Matrix out = xv.cwiseProduct(mask);
  const int ix = x.id();
  return x.graph().record("dropout", std::move(out), {x}, [ix, mask = std::move(mask)](Graph& gr, int self) {
    gr.accumulate(ix, gr.out_grad(self).cwiseProduct(mask));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  Graph& g = parts.front().graph();
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const Var& p : parts) {
    if (&p.graph() != &g) throw GraphError("concat_cols: operands from different graphs");
    if (p.rows() != rows) shape_mismatch("concat_cols", parts.front().value(), p.value());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Index>> pieces;
  Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    pieces.emplace_back(p.id(), p.cols());
    at += p.cols();
  }
  Var result = g.record("concat_cols", std::move(out), parts, [pieces](Graph& gr, int self) {
    const Matrix& d = gr.out_grad(self);
    Index off = 0;
    for (auto [id, c] : pieces) {
      gr.accumulate(id, d.middleCols(off, c));
      off += c;
    }
  });
  return result;
}

Var concat_cols(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat_cols(parts);
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no operands");
  Graph& g = parts.front().graph();
  const Index cols = parts.front().cols();
  Index rows = 0;
  for (const Var& p : parts) {
    if (&p.graph() != &g) throw GraphError("concat_rows: operands from different graphs");
    if (p.cols() != cols) shape_mismatch("concat_rows", parts.front().value(), p.value());
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Index>> pieces;
  Index at = 0;
  for (const Var& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    pieces.emplace_back(p.id(), p.rows());
    at += p.rows();
  }
  return g.record("concat_rows", std::move(out), parts, [pieces](Graph& gr, int self) {
    const Matrix& d = gr.out_grad(self);
    Index off = 0;
    for (auto [id, r] : pieces) {
      gr.accumulate(id, d.middleRows(off, r));
      off += r;
    }
  });
}

Var concat_rows(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat_rows(parts);
}

Var slice_cols(Var x, Index start, Index count) {
  const Matrix& xv = x.value();
  if (start < 0 || count <= 0 || start + count > xv.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(start) + ", " + std::to_string(start + count) +
                         ") outside " + shape_string(xv.rows(), xv.cols()));
  }
  Matrix out = xv.middleCols(start, count);
  const int ix = x.id();
  const Index rows = xv.rows(), cols = xv.cols();
  return x.graph().record("slice_cols", std::move(out), {x}, [ix, start, count, rows, cols](Graph& gr, int self) {
    Matrix full = Matrix::Zero(rows, cols);
    full.middleCols(start, count) = gr.out_grad(self);
    gr.accumulate(ix, full);
  });
}

Var reshape(Var x, Index rows, Index cols) {
  const Matrix& xv = x.value();
  if (rows * cols != xv.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(xv.rows(), xv.cols()) + " as " +
                         shape_string(rows, cols));
  }
  Matrix out = Eigen::Map<const Matrix>(xv.data(), rows, cols);
  const int ix = x.id();
  const Index r0 = xv.rows(), c0 = xv.cols();
  return x.graph().record("reshape", std::move(out), {x}, [ix, r0, c0](Graph& gr, int self) {
    gr.accumulate(ix, Eigen::Map<const Matrix>(gr.out_grad(self).data(), r0, c0));
  });
}

Var row(Var x, Index r) {
  const Matrix& xv = x.value();
  if (r < 0 || r >= xv.rows()) {
    throw DimensionError("row: index " + std::to_string(r) + " outside " + shape_string(xv.rows(), xv.cols()));
  }
  Matrix out = xv.row(r);
  const int ix = x.id();
  const Index rows = xv.rows(), cols = xv.cols();
  return x.graph().record("row", std::move(out), {x}, [ix, r, rows, cols](Graph& gr, int self) {
    Matrix full = Matrix::Zero(rows, cols);
    full.row(r) = gr.out_grad(self);
    gr.accumulate(ix, full);
  });
}

Var sum(Var x) {
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  const int ix = x.id();
  const Index rows = x.rows(), cols = x.cols();
  return x.graph().record("sum", std::move(out), {x}, [ix, rows, cols](Graph& gr, int self) {
    gr.accumulate(ix, Matrix::Constant(rows, cols, gr.out_grad(self)(0, 0)));
  });
}

namespace {

void check_labels(std::span<const int> labels, Index rows, Index classes) {
  if (static_cast<Index>(labels.size()) != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(rows) + " rows");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw DataError("cross_entropy: label " + std::to_string(labels[i]) + " of sample " + std::to_string(i) +
                      " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

}  // namespace

Var cross_entropy(Var logits, std::span<const int> labels) {
  const Matrix& z = logits.value();
  check_labels(labels, z.rows(), z.cols());
  const Matrix logp = log_softmax_rows(z);
  double total = 0.0;
  for (Index i = 0; i < z.rows(); ++i) total -= logp(i, labels[static_cast<std::size_t>(i)]);
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(z.rows());
  const int iz = logits.id();
  std::vector<int> lab(labels.begin(), labels.end());
  return logits.graph().record("cross_entropy", std::move(out), {logits},
                               [iz, lab = std::move(lab), logp](Graph& gr, int self) {
                                 Matrix d = logp.array().exp();
                                 for (Index i = 0; i < d.rows(); ++i) d(i, lab[static_cast<std::size_t>(i)]) -= 1.0;
                                 d *= gr.out_grad(self)(0, 0) / static_cast<double>(d.rows());
                                 gr.accumulate(iz, d);
                               });
}

double cross_entropy_probs(const Matrix& probs, std::span<const int> labels) {
  check_labels(labels, probs.rows(), probs.cols());
  if (!probs.allFinite()) throw NumericError("cross_entropy_probs: non-finite probabilities");
  double total = 0.0;
  for (Index i = 0; i < probs.rows(); ++i) total -= std::log(probs(i, labels[static_cast<std::size_t>(i)]));
  const double loss = total / static_cast<double>(probs.rows());
  if (!std::isfinite(loss)) throw NumericError("cross_entropy_probs: zero probability on a label");
  return loss + 0.0;  // -0 -> +0
}

}  // namespace gzf
