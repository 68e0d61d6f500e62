#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "semrte/tensor.hpp"

namespace semrte {
class Rng;
}

namespace semrte::ag {

// Handle to a node on a Tape.
struct Var {
  std::int32_t id = -1;
};

// Reverse-mode tape. Every op appends one node holding its value and a
// closure that pushes the node's gradient into its inputs. Parameters are
// referenced, not copied, and must outlive the tape.
template <typename T>
class Tape {
 public:
  using Mat = Matrix<T>;
  using Backward = std::function<void(Tape&, Var)>;

  Var constant(Mat value);
  Var param(const Parameter<T>& p);
  Var push(Mat value, std::span<const Var> inputs, Backward backward);
  Var push(Mat value, std::initializer_list<Var> inputs, Backward backward) {
    return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
  }

  const Mat& value(Var v) const;
  // Lazily zero-initialized to the node's shape.
  Mat& grad(Var v);
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  bool has_grad(Var v) const { return node(v).grad.size() > 0; }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and runs closures in reverse.
  void backward(Var root);

  // fn(const Parameter<T>&, const Mat& grad) for every parameter node that
  // received a gradient. A parameter read twice is visited twice.
  template <typename Fn>
  void for_each_param_grad(Fn&& fn) const {
    for (const auto& n : nodes_) {
      if (n.param && n.grad.size() > 0) fn(*n.param, n.grad);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    const Mat* external = nullptr;
    const Parameter<T>* param = nullptr;
    Mat grad;
    Backward backward;
    bool requires_grad = false;
  };
  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }
  const Node& node(Var v) const { return nodes_[static_cast<std::size_t>(v.id)]; }

  std::deque<Node> nodes_;  // stable references across push_back
};

// ---------------------------------------------------------------------------
// Ops. Shapes follow Eigen conventions; rows are positions, columns features.

template <typename T> Var matmul(Tape<T>& t, Var a, Var b);
// a * b^T
template <typename T> Var matmul_nt(Tape<T>& t, Var a, Var b);
template <typename T> Var add(Tape<T>& t, Var a, Var b);
// Adds a 1 x n row to every row of a.
template <typename T> Var add_row(Tape<T>& t, Var a, Var row);
template <typename T> Var mul(Tape<T>& t, Var a, Var b);
template <typename T> Var scale(Tape<T>& t, Var a, T s);
// 1 - a, elementwise.
template <typename T> Var one_minus(Tape<T>& t, Var a);
template <typename T> Var sigmoid(Tape<T>& t, Var a);
template <typename T> Var tanh(Tape<T>& t, Var a);
// Tanh approximation of GELU.
template <typename T> Var gelu(Tape<T>& t, Var a);
// Row-wise normalization with 1 x n gain and bias.
template <typename T> Var layer_norm(Tape<T>& t, Var x, Var gain, Var bias, T eps = T(1e-5));
// Row-wise softmax over the first `valid` columns; the rest get probability 0.
template <typename T> Var masked_softmax(Tape<T>& t, Var a, int valid);
template <typename T> Var slice_rows(Tape<T>& t, Var a, int start, int count);
template <typename T> Var slice_cols(Tape<T>& t, Var a, int start, int count);
template <typename T> Var concat_rows(Tape<T>& t, std::span<const Var> parts);
template <typename T> Var concat_cols(Tape<T>& t, std::span<const Var> parts);
// Row-major flatten into a single row.
template <typename T> Var flatten(Tape<T>& t, Var a);
template <typename T> Var gather_rows(Tape<T>& t, Var table, std::span<const int> ids);
// Inverted dropout; identity when rate == 0.
template <typename T> Var dropout(Tape<T>& t, Var a, double rate, Rng& rng);
// -log softmax(logits)[gold] for a 1 x C row, via log-sum-exp.
template <typename T> Var cross_entropy(Tape<T>& t, Var logits, int gold);
// Sum of 1x1 nodes.
template <typename T> Var sum_scalars(Tape<T>& t, std::span<const Var> parts);

}  // namespace semrte::ag
