#pragma once

#include <deque>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gzf/tensor.hpp"

namespace gzf {

class Graph;

/// Handle to a node recorded in a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Graph& graph() const { return *graph_; }
  int id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, int id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  int id_ = -1;
};

/// Tape for one forward pass. Nodes are appended in execution order, which is
/// a topological order, so backward is a single reverse sweep. Parameters are
/// bound by reference and never copied; their gradients live in the graph.
/// A graph is confined to one thread.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Input that does not participate in differentiation.
  Var constant(Matrix value);
  Var constant(const Tensor& t) { return constant(t.matrix()); }

  /// Leaf bound to caller-owned storage; gradient is collected for it.
  /// Binding the same tensor twice returns the same node.
  Var param(const Tensor& t);

  /// Reverse sweep from a 1x1 node. May be called once per graph.
  void backward(Var loss);

  bool backward_done() const noexcept { return backward_done_; }

  /// Gradient reached for a bound parameter, or nullptr if it received none.
  const Matrix* grad(const Tensor& t) const;
  Matrix grad_or_zero(const Tensor& t) const;

  /// Gradient of any recorded node (after backward).
  const Matrix* node_grad(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

  // Op-author interface.
  Var record(std::string_view op, Matrix value, std::span<const Var> inputs, BackwardFn fn);
  Var record(std::string_view op, Matrix value, std::initializer_list<Var> inputs, BackwardFn fn) {
    return record(op, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
  }
  const Matrix& value(int id) const;
  const Matrix& out_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  template <typename Expr>
  void accumulate(int id, const Expr& g) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

 private:
  friend class Var;

  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    BackwardFn backward;
    bool needs_grad = false;
    bool is_param = false;
  };

  std::deque<Node> nodes_;
  std::unordered_map<const Matrix*, int> params_;
  bool backward_done_ = false;
};

using Rng = std::mt19937_64;

// Differentiable operations. Every op validates shapes and rejects non-finite
// results with a NumericError naming the op.

/// A[m x k] * B[k x n].
Var matmul(Var a, Var b);
/// A[m x k] * B[n x k]^T; the usual X W^T of a linear layer.
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
/// X[r x c] + b broadcast over rows; b is 1 x c.
Var add_bias(Var x, Var bias);
/// X W^T + b.
Var linear(Var x, Var weight, Var bias);
Var mul(Var a, Var b);
Var scale(Var x, double s);
Var relu(Var x);
Var softmax_rows(Var x);
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
/// Inverted dropout. Identity (same node) when not training or rate == 0.
Var dropout(Var x, double rate, bool training, Rng& rng);
/// Concatenation along the last axis.
Var concat_cols(std::span<const Var> parts);
Var concat_cols(Var a, Var b);
Var concat_rows(std::span<const Var> parts);
Var concat_rows(Var a, Var b);
Var slice_cols(Var x, Index start, Index count);
/// Row-major reinterpretation to rows x cols (sizes must agree).
Var reshape(Var x, Index rows, Index cols);
Var row(Var x, Index r);
Var sum(Var x);
/// Mean negative log-likelihood of `labels` under softmax(logits), computed
/// through log-softmax. logits is B x C.
Var cross_entropy(Var logits, std::span<const int> labels);

/// -mean log p[label] for a batch of probability rows. Value-level only.
double cross_entropy_probs(const Matrix& probs, std::span<const int> labels);

namespace debug {
/// Negative-control switch: when set, the layer-norm backward rule is wrong.
void set_backward_fault(bool enabled);
bool backward_fault();
}  // namespace debug

}  // namespace gzf
