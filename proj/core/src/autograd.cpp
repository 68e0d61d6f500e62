#include "semrte/autograd.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "semrte/rng.hpp"

namespace semrte::ag {

template <typename T>
Var Tape<T>::constant(Mat value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::param(const Parameter<T>& p) {
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::push(Mat value, std::span<const Var> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  for (Var in : inputs) n.requires_grad = n.requires_grad || node(in).requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
const typename Tape<T>::Mat& Tape<T>::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.value;
}

template <typename T>
typename Tape<T>::Mat& Tape<T>::grad(Var v) {
  Node& n = node(v);
  if (n.grad.size() == 0) {
    const Mat& val = n.external ? *n.external : n.value;
    n.grad = Mat::Zero(val.rows(), val.cols());
  }
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var root) {
  const Mat& rv = value(root);
  if (rv.rows() != 1 || rv.cols() != 1) throw std::invalid_argument("backward root must be 1x1");
  grad(root)(0, 0) += T(1);
  for (std::int32_t i = root.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward && n.grad.size() > 0) n.backward(*this, Var{i});
  }
}

// ---------------------------------------------------------------------------

namespace {
template <typename T>
void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}
}  // namespace

template <typename T>
Var matmul(Tape<T>& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  check<T>(A.cols() == B.rows(), "matmul: inner dimensions differ");
  Matrix<T> C = A * B;
  return t.push(std::move(C), {a, b}, [a, b](Tape<T>& tp, Var self) {
    const auto& G = tp.grad(self);
    if (tp.requires_grad(a)) tp.grad(a).noalias() += G * tp.value(b).transpose();
    if (tp.requires_grad(b)) tp.grad(b).noalias() += tp.value(a).transpose() * G;
  });
}

template <typename T>
Var matmul_nt(Tape<T>& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  check<T>(A.cols() == B.cols(), "matmul_nt: inner dimensions differ");
  Matrix<T> C = A * B.transpose();
  return t.push(std::move(C), {a, b}, [a, b](Tape<T>& tp, Var self) {
    const auto& G = tp.grad(self);
    if (tp.requires_grad(a)) tp.grad(a).noalias() += G * tp.value(b);
    if (tp.requires_grad(b)) tp.grad(b).noalias() += G.transpose() * tp.value(a);
  });
}

template <typename T>
Var add(Tape<T>& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  check<T>(A.rows() == B.rows() && A.cols() == B.cols(), "add: shape mismatch");
  Matrix<T> C = A + B;
  return t.push(std::move(C), {a, b}, [a, b](Tape<T>& tp, Var self) {
    const auto& G = tp.grad(self);
    if (tp.requires_grad(a)) tp.grad(a) += G;
    if (tp.requires_grad(b)) tp.grad(b) += G;
  });
}

template <typename T>
Var add_row(Tape<T>& t, Var a, Var row) {
  const auto& A = t.value(a);
  const auto& R = t.value(row);
  check<T>(R.rows() == 1 && R.cols() == A.cols(), "add_row: row width mismatch");
  Matrix<T> C = A.rowwise() + R.row(0);
  return t.push(std::move(C), {a, row}, [a, row](Tape<T>& tp, Var self) {
    const auto& G = tp.grad(self);
    if (tp.requires_grad(a)) tp.grad(a) += G;
    if (tp.requires_grad(row)) tp.grad(row) += G.colwise().sum();
  });
}

template <typename T>
Var mul(Tape<T>& t, Var a, Var b) {
  const auto& A = t.value(a);
  const auto& B = t.value(b);
  check<T>(A.rows() == B.rows() && A.cols() == B.cols(), "mul: shape mismatch");
  Matrix<T> C = A.cwiseProduct(B);
  return t.push(std::move(C), {a, b}, [a, b](Tape<T>& tp, Var self) {
    const auto& G = tp.grad(self);
    if (tp.requires_grad(a)) tp.grad(a) += G.cwiseProduct(tp.value(b));
    if (tp.requires_grad(b)) tp.grad(b) += G.cwiseProduct(tp.value(a));
  });
}

template <typename T>
Var scale(Tape<T>& t, Var a, T s) {
  Matrix<T> C = t.value(a) * s;
  return t.push(std::move(C), {a}, [a, s](Tape<T>& tp, Var self) {
    tp.grad(a) += tp.grad(self) * s;
  });
}

template <typename T>
Var one_minus(Tape<T>& t, Var a) {
  Matrix<T> C = (T(1) - t.value(a).array()).matrix();
  return t.push(std::move(C), {a}, [a](Tape<T>& tp, Var self) { tp.grad(a) -= tp.grad(self); });
}

template <typename T>
Var sigmoid(Tape<T>& t, Var a) {
  Matrix<T> Y = (T(1) / (T(1) + (-t.value(a).array()).exp())).matrix();
  return t.push(std::move(Y), {a}, [a](Tape<T>& tp, Var self) {
    const auto& Yv = tp.value(self);
    tp.grad(a).array() += tp.grad(self).array() * Yv.array() * (T(1) - Yv.array());
  });
}

template <typename T>
Var tanh(Tape<T>& t, Var a) {
  Matrix<T> Y = t.value(a).array().tanh().matrix();
  return t.push(std::move(Y), {a}, [a](Tape<T>& tp, Var self) {
    const auto& Yv = tp.value(self);
    tp.grad(a).array() += tp.grad(self).array() * (T(1) - Yv.array().square());
  });
}

template <typename T>
Var gelu(Tape<T>& t, Var a) {
  static constexpr T kC = T(0.7978845608028654);  // sqrt(2/pi)
  static constexpr T kA = T(0.044715);
  const auto& X = t.value(a);
  Matrix<T> inner = (kC * (X.array() + kA * X.array().cube())).matrix();
  Matrix<T> th = inner.array().tanh().matrix();
  Matrix<T> Y = (T(0.5) * X.array() * (T(1) + th.array())).matrix();
  return t.push(std::move(Y), {a}, [a, th = std::move(th)](Tape<T>& tp, Var self) {
    const auto& Xv = tp.value(a);
    auto d = T(0.5) * (T(1) + th.array()) +
             T(0.5) * Xv.array() * (T(1) - th.array().square()) * kC *
                 (T(1) + T(3) * kA * Xv.array().square());
    tp.grad(a).array() += tp.grad(self).array() * d;
  });
}

template <typename T>
Var layer_norm(Tape<T>& t, Var x, Var gain, Var bias, T eps) {
  const auto& X = t.value(x);
  const auto& G = t.value(gain);
  const auto& B = t.value(bias);
  const auto n = X.cols();
  check<T>(G.cols() == n && B.cols() == n && G.rows() == 1 && B.rows() == 1,
           "layer_norm: gain/bias width mismatch");
  Matrix<T> xhat(X.rows(), n);
  Matrix<T> inv(X.rows(), 1);
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const T mu = X.row(r).mean();
    const T var = (X.row(r).array() - mu).square().mean();
    inv(r, 0) = T(1) / std::sqrt(var + eps);
    xhat.row(r) = (X.row(r).array() - mu) * inv(r, 0);
  }
  Matrix<T> Y = (xhat.array().rowwise() * G.row(0).array()).matrix();
  Y.rowwise() += B.row(0);
  return t.push(std::move(Y), {x, gain, bias},
                [x, gain, bias, xhat = std::move(xhat), inv = std::move(inv)](Tape<T>& tp,
                                                                              Var self) {
                  const auto& dY = tp.grad(self);
                  if (tp.requires_grad(gain)) tp.grad(gain) += dY.cwiseProduct(xhat).colwise().sum();
                  if (tp.requires_grad(bias)) tp.grad(bias) += dY.colwise().sum();
                  if (!tp.requires_grad(x)) return;
                  const auto& Gv = tp.value(gain);
                  const T n = static_cast<T>(xhat.cols());
                  auto& dX = tp.grad(x);
                  for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
                    Eigen::Matrix<T, 1, Eigen::Dynamic> dxhat =
                        dY.row(r).cwiseProduct(Gv.row(0));
                    const T s1 = dxhat.sum();
                    const T s2 = dxhat.cwiseProduct(xhat.row(r)).sum();
                    dX.row(r).array() +=
                        inv(r, 0) / n * (n * dxhat.array() - s1 - xhat.row(r).array() * s2);
                  }
                });
}

template <typename T>
Var masked_softmax(Tape<T>& t, Var a, int valid) {
  const auto& A = t.value(a);
  check<T>(valid >= 1 && valid <= A.cols(), "masked_softmax: bad valid width");
  Matrix<T> P = Matrix<T>::Zero(A.rows(), A.cols());
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    auto head = A.row(r).head(valid);
    const T mx = head.maxCoeff();
    auto e = (head.array() - mx).exp();
    P.row(r).head(valid) = e / e.sum();
  }
  return t.push(std::move(P), {a}, [a](Tape<T>& tp, Var self) {
    const auto& Pv = tp.value(self);
    const auto& dP = tp.grad(self);
    auto& dA = tp.grad(a);
    for (Eigen::Index r = 0; r < Pv.rows(); ++r) {
      const T dot = dP.row(r).dot(Pv.row(r));
      dA.row(r).array() += Pv.row(r).array() * (dP.row(r).array() - dot);
    }
  });
}

template <typename T>
Var slice_rows(Tape<T>& t, Var a, int start, int count) {
  const auto& A = t.value(a);
  check<T>(start >= 0 && count >= 0 && start + count <= A.rows(), "slice_rows: out of range");
  Matrix<T> C = A.middleRows(start, count);
  return t.push(std::move(C), {a}, [a, start, count](Tape<T>& tp, Var self) {
    tp.grad(a).middleRows(start, count) += tp.grad(self);
  });
}

template <typename T>
Var slice_cols(Tape<T>& t, Var a, int start, int count) {
  const auto& A = t.value(a);
  check<T>(start >= 0 && count >= 0 && start + count <= A.cols(), "slice_cols: out of range");
  Matrix<T> C = A.middleCols(start, count);
  return t.push(std::move(C), {a}, [a, start, count](Tape<T>& tp, Var self) {
    tp.grad(a).middleCols(start, count) += tp.grad(self);
  });
}

template <typename T>
Var concat_rows(Tape<T>& t, std::span<const Var> parts) {
  check<T>(!parts.empty(), "concat_rows: no inputs");
  const auto cols = t.value(parts[0]).cols();
  Eigen::Index rows = 0;
  for (Var p : parts) {
    check<T>(t.value(p).cols() == cols, "concat_rows: width mismatch");
    rows += t.value(p).rows();
  }
  Matrix<T> C(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const auto& P = t.value(p);
    C.middleRows(at, P.rows()) = P;
    at += P.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.push(std::move(C), parts, [inputs](Tape<T>& tp, Var self) {
    const auto& G = tp.grad(self);
    Eigen::Index off = 0;
    for (Var p : inputs) {
      const auto r = tp.value(p).rows();
      if (tp.requires_grad(p)) tp.grad(p) += G.middleRows(off, r);
      off += r;
    }
  });
}


template <typename T>
Var concat_cols(Tape<T>& t, std::span<const Var> parts) {
  check<T>(!parts.empty(), "concat_cols: no inputs");
  const auto rows = t.value(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    check<T>(t.value(p).rows() == rows, "concat_cols: height mismatch");
    cols += t.value(p).cols();
  }
  Matrix<T> C(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const auto& P = t.value(p);
    C.middleCols(at, P.cols()) = P;
    at += P.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.push(std::move(C), parts, [inputs](Tape<T>& tp, Var self) {
    const auto& G = tp.grad(self);
    Eigen::Index off = 0;
    for (Var p : inputs) {
      const auto c = tp.value(p).cols();
      if (tp.requires_grad(p)) tp.grad(p) += G.middleCols(off, c);
      off += c;
    }
  });
}

template <typename T>
Var flatten(Tape<T>& t, Var a) {
  const auto& A = t.value(a);
  Matrix<T> C = Eigen::Map<const Matrix<T>>(A.data(), 1, A.size());
  return t.push(std::move(C), {a}, [a](Tape<T>& tp, Var self) {
    auto& dA = tp.grad(a);
    Eigen::Map<Matrix<T>>(dA.data(), 1, dA.size()) += tp.grad(self);
  });
}

template <typename T>
Var gather_rows(Tape<T>& t, Var table, std::span<const int> ids) {
  const auto& W = t.value(table);
  Matrix<T> C(static_cast<Eigen::Index>(ids.size()), W.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= W.rows()) throw std::out_of_range("gather_rows: id out of range");
    C.row(static_cast<Eigen::Index>(i)) = W.row(ids[i]);
  }
  std::vector<int> rows(ids.begin(), ids.end());
  return t.push(std::move(C), {table}, [table, rows = std::move(rows)](Tape<T>& tp, Var self) {
    const auto& G = tp.grad(self);
    auto& dW = tp.grad(table);
    for (std::size_t i = 0; i < rows.size(); ++i) dW.row(rows[i]) += G.row(static_cast<Eigen::Index>(i));
  });
}

template <typename T>
Var dropout(Tape<T>& t, Var a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw std::invalid_argument("dropout rate must be < 1");
  const auto& A = t.value(a);
  const T keep_scale = T(1.0 / (1.0 - rate));
  Matrix<T> mask(A.rows(), A.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.uniform() < rate ? T(0) : keep_scale;
  }
  Matrix<T> C = A.cwiseProduct(mask);
  return t.push(std::move(C), {a}, [a, mask = std::move(mask)](Tape<T>& tp, Var self) {
    tp.grad(a) += tp.grad(self).cwiseProduct(mask);
  });
}

template <typename T>
Var cross_entropy(Tape<T>& t, Var logits, int gold) {
  const auto& Z = t.value(logits);
  check<T>(Z.rows() == 1 && gold >= 0 && gold < Z.cols(), "cross_entropy: bad logits or gold");
  const T mx = Z.maxCoeff();
  const T lse = mx + std::log((Z.array() - mx).exp().sum());
  Matrix<T> loss(1, 1);
  loss(0, 0) = lse - Z(0, gold);
  return t.push(std::move(loss), {logits}, [logits, gold, lse](Tape<T>& tp, Var self) {
    const T g = tp.grad(self)(0, 0);
    Matrix<T> p = (tp.value(logits).array() - lse).exp().matrix();
    p(0, gold) -= T(1);
    tp.grad(logits) += g * p;
  });
}

template <typename T>
Var sum_scalars(Tape<T>& t, std::span<const Var> parts) {
  Matrix<T> s = Matrix<T>::Zero(1, 1);
  for (Var p : parts) {
    check<T>(t.value(p).size() == 1, "sum_scalars: non-scalar input");
    s(0, 0) += t.value(p)(0, 0);
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.push(std::move(s), parts, [inputs](Tape<T>& tp, Var self) {
    const T g = tp.grad(self)(0, 0);
    for (Var p : inputs) {
      if (tp.requires_grad(p)) tp.grad(p)(0, 0) += g;
    }
  });
}

#define SEMRTE_INSTANTIATE_AG(T)                                                 \
  template class Tape<T>;                                                       \
  template Var matmul<T>(Tape<T>&, Var, Var);                                   \
  template Var matmul_nt<T>(Tape<T>&, Var, Var);                                \
  template Var add<T>(Tape<T>&, Var, Var);                                      \
  template Var add_row<T>(Tape<T>&, Var, Var);                                  \
  template Var mul<T>(Tape<T>&, Var, Var);                                      \
  template Var scale<T>(Tape<T>&, Var, T);                                      \
  template Var one_minus<T>(Tape<T>&, Var);                                     \
  template Var sigmoid<T>(Tape<T>&, Var);                                       \
  template Var tanh<T>(Tape<T>&, Var);                                          \
  template Var gelu<T>(Tape<T>&, Var);                                          \
  template Var layer_norm<T>(Tape<T>&, Var, Var, Var, T);                       \
  template Var masked_softmax<T>(Tape<T>&, Var, int);                           \
  template Var slice_rows<T>(Tape<T>&, Var, int, int);                          \
  template Var slice_cols<T>(Tape<T>&, Var, int, int);                          \
  template Var concat_rows<T>(Tape<T>&, std::span<const Var>);                  \
  template Var concat_cols<T>(Tape<T>&, std::span<const Var>);                  \
  template Var flatten<T>(Tape<T>&, Var);                                       \
  template Var gather_rows<T>(Tape<T>&, Var, std::span<const int>);             \
  template Var dropout<T>(Tape<T>&, Var, double, Rng&);                         \
  template Var cross_entropy<T>(Tape<T>&, Var, int);                            \
  template Var sum_scalars<T>(Tape<T>&, std::span<const Var>);

SEMRTE_INSTANTIATE_AG(float)
SEMRTE_INSTANTIATE_AG(double)

}  // namespace semrte::ag
