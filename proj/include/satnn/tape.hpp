#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace satnn {

// Row-major throughout: message passing is dominated by row gathers,
// row scatters and per-row normalization.
template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename Scalar>
class Tape;

// Handle to a node on a tape. All tensors are dense matrices; vectors are
// single-column or single-row matrices and scalars are 1x1.
template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  int id = -1;

  const MatX<Scalar>& value() const { return tape->value(id); }
  const MatX<Scalar>& grad() const { return tape->grad_of(id); }
  bool requires_grad() const { return tape->requires_grad(id); }
};

// Reverse-mode tape over Eigen matrices. Creation order is the topological
// order, so backward() simply walks nodes in reverse. With grad disabled the
// same graph code runs as a plain forward evaluator.
template <typename Scalar>
class Tape {
 public:
  using Mat = MatX<Scalar>;
  // backward closure: (tape, upstream gradient of this node)
  using BackFn = std::function<void(Tape&, const Mat&)>;

  bool grad_enabled = true;

  Var<Scalar> leaf(Mat v, bool requires_grad = false) {
    nodes_.push_back({std::move(v), {}, {}, requires_grad && grad_enabled});
    return {this, static_cast<int>(nodes_.size() - 1)};
  }
  Var<Scalar> constant(Mat v) { return leaf(std::move(v), false); }
  Var<Scalar> scalar(Scalar s) {
    Mat m(1, 1);
    m(0, 0) = s;
    return constant(std::move(m));
  }

  Var<Scalar> make(Mat v, bool requires_grad, BackFn back) {
    if (!grad_enabled || !requires_grad)
      return leaf(std::move(v), false);
    nodes_.push_back({std::move(v), {}, std::move(back), true});
    return {this, static_cast<int>(nodes_.size() - 1)};
  }

  const Mat& value(int id) const { return nodes_[id].value; }
  Mat& mutable_value(int id) { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  const Mat& grad_of(int id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  bool has_grad(int id) const { return nodes_[id].grad.size() != 0; }

  void accumulate(int id, const Mat& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  // Accumulates an Eigen expression without materializing a temporary.
  template <typename Expr>
  void accumulate_expr(int id, const Expr& expr) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad.resize(n.value.rows(), n.value.cols());
      n.grad.noalias() = expr;
    } else {
      n.grad.noalias() += expr;
    }
  }

  // Zero-initialized gradient buffer for in-place scatter accumulation;
  // null when the node does not require gradients.
  Mat* grad_buffer(int id) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return nullptr;
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    return &n.grad;
  }

  // Seeds d(root)/d(root) = 1 and propagates. `root` must be 1x1.
  void backward(Var<Scalar> root) {
    if (!grad_enabled) throw std::logic_error("backward with grads disabled");
    Node& r = nodes_[root.id];
    if (r.value.size() != 1) throw std::invalid_argument("backward root must be scalar");
    accumulate(root.id, Mat::Ones(1, 1));
    for (int i = root.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.backward && n.grad.size() != 0) n.backward(*this, n.grad);
    }
  }

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    BackFn backward;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Primitive operations
// ---------------------------------------------------------------------------

template <typename S>
Var<S> matmul(Var<S> a, Var<S> b) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value() * b.value();
  return t.make(std::move(v), a.requires_grad() || b.requires_grad(),
                [a, b](Tape<S>& tp, const MatX<S>& g) {
                  tp.accumulate_expr(a.id, g * tp.value(b.id).transpose());
                  tp.accumulate_expr(b.id, tp.value(a.id).transpose() * g);
                });
}

template <typename S>
Var<S> add(Var<S> a, Var<S> b) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value() + b.value();
  return t.make(std::move(v), a.requires_grad() || b.requires_grad(),
                [a, b](Tape<S>& tp, const MatX<S>& g) {
                  tp.accumulate(a.id, g);
                  tp.accumulate(b.id, g);
                });
}

template <typename S>
Var<S> sub(Var<S> a, Var<S> b) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value() - b.value();
  return t.make(std::move(v), a.requires_grad() || b.requires_grad(),
                [a, b](Tape<S>& tp, const MatX<S>& g) {
                  tp.accumulate(a.id, g);
                  tp.accumulate(b.id, -g);
                });
}

// Elementwise (Hadamard) product.
template <typename S>
Var<S> mul(Var<S> a, Var<S> b) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value().cwiseProduct(b.value());
  return t.make(std::move(v), a.requires_grad() || b.requires_grad(),
                [a, b](Tape<S>& tp, const MatX<S>& g) {
                  tp.accumulate_expr(a.id, g.cwiseProduct(tp.value(b.id)));
                  tp.accumulate_expr(b.id, g.cwiseProduct(tp.value(a.id)));
                });
}

template <typename S>
Var<S> scale(Var<S> a, S c) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value() * c;
  return t.make(std::move(v), a.requires_grad(),
                [a, c](Tape<S>& tp, const MatX<S>& g) { tp.accumulate(a.id, g * c); });
}

template <typename S>
Var<S> add_scalar(Var<S> a, S c) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value().array() + c;
  return t.make(std::move(v), a.requires_grad(),
                [a](Tape<S>& tp, const MatX<S>& g) { tp.accumulate(a.id, g); });
}

// c - A
template <typename S>
Var<S> rsub_scalar(S c, Var<S> a) {
  Tape<S>& t = *a.tape;
  MatX<S> v = (c - a.value().array()).matrix();
  return t.make(std::move(v), a.requires_grad(),
                [a](Tape<S>& tp, const MatX<S>& g) { tp.accumulate(a.id, -g); });
}

// A + 1r (bias broadcast over rows); r must be 1 x cols.
template <typename S>
Var<S> add_rowvec(Var<S> a, Var<S> r) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value().rowwise() + r.value().row(0);
  return t.make(std::move(v), a.requires_grad() || r.requires_grad(),
                [a, r](Tape<S>& tp, const MatX<S>& g) {
                  tp.accumulate(a.id, g);
                  tp.accumulate_expr(r.id, g.colwise().sum());
                });
}

template <typename S>
Var<S> tanh_op(Var<S> a) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value().array().tanh();
  int out_hint = static_cast<int>(t.size());
  return t.make(std::move(v), a.requires_grad(),
                [a, out_hint](Tape<S>& tp, const MatX<S>& g) {
                  const MatX<S>& y = tp.value(out_hint);
                  tp.accumulate_expr(a.id,
                                     (g.array() * (S(1) - y.array().square())).matrix());
                });
}

template <typename S>
Var<S> sigmoid_op(Var<S> a) {
  Tape<S>& t = *a.tape;
  MatX<S> v = (S(1) / (S(1) + (-a.value().array()).exp())).matrix();
  int out_hint = static_cast<int>(t.size());
  return t.make(std::move(v), a.requires_grad(),
                [a, out_hint](Tape<S>& tp, const MatX<S>& g) {
                  const MatX<S>& y = tp.value(out_hint);
                  tp.accumulate_expr(
                      a.id, (g.array() * y.array() * (S(1) - y.array())).matrix());
                });
}

template <typename S>
Var<S> relu_op(Var<S> a) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value().cwiseMax(S(0));
  return t.make(std::move(v), a.requires_grad(),
                [a](Tape<S>& tp, const MatX<S>& g) {
                  const MatX<S>& x = tp.value(a.id);
                  tp.accumulate(a.id, (g.array() * (x.array() > S(0)).template cast<S>()).matrix());
                });
}

template <typename S>
Var<S> log_op(Var<S> a) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value().array().log();
  return t.make(std::move(v), a.requires_grad(),
                [a](Tape<S>& tp, const MatX<S>& g) {
                  tp.accumulate_expr(a.id,
                                     (g.array() / tp.value(a.id).array()).matrix());
                });
}

template <typename S>
Var<S> exp_op(Var<S> a) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value().array().exp();
  int out_hint = static_cast<int>(t.size());
  return t.make(std::move(v), a.requires_grad(),
                [a, out_hint](Tape<S>& tp, const MatX<S>& g) {
                  tp.accumulate_expr(a.id, g.cwiseProduct(tp.value(out_hint)));
                });
}

// Pass-through gradient strictly inside [lo, hi], zero where clamped.
template <typename S>
Var<S> clamp_op(Var<S> a, S lo, S hi) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value().cwiseMax(lo).cwiseMin(hi);
  return t.make(std::move(v), a.requires_grad(),
                [a, lo, hi](Tape<S>& tp, const MatX<S>& g) {
                  const MatX<S>& x = tp.value(a.id);
                  MatX<S> gx =
                      (g.array() * ((x.array() >= lo) && (x.array() <= hi)).template cast<S>())
                          .matrix();
                  tp.accumulate(a.id, gx);
                });
}

// out.row(i) = a.row(perm[i]); perm must be a permutation.
template <typename S>
Var<S> rows_permute(Var<S> a, std::vector<int> perm) {
  Tape<S>& t = *a.tape;
  MatX<S> v(static_cast<int>(perm.size()), a.value().cols());
  for (size_t i = 0; i < perm.size(); ++i) v.row(i) = a.value().row(perm[i]);
  return t.make(std::move(v), a.requires_grad(),
                [a, perm](Tape<S>& tp, const MatX<S>& g) {
                  MatX<S>* gx = tp.grad_buffer(a.id);
                  if (!gx) return;
                  for (size_t i = 0; i < perm.size(); ++i) gx->row(perm[i]) += g.row(i);
                });
}

// out.row(e) = a.row(idx[e]); duplicate indices allowed.
template <typename S>
Var<S> gather_rows(Var<S> a, std::vector<int> idx) {
  Tape<S>& t = *a.tape;
  MatX<S> v(static_cast<int>(idx.size()), a.value().cols());
  for (size_t e = 0; e < idx.size(); ++e) v.row(e) = a.value().row(idx[e]);
  return t.make(std::move(v), a.requires_grad(),
                [a, idx](Tape<S>& tp, const MatX<S>& g) {
                  MatX<S>* gx = tp.grad_buffer(a.id);
                  if (!gx) return;
                  for (size_t e = 0; e < idx.size(); ++e) gx->row(idx[e]) += g.row(e);
                });
}

// out.row(seg[e]) += a.row(e) for each input row e.
template <typename S>
Var<S> segment_sum(Var<S> a, std::vector<int> seg, int num_segments) {
  Tape<S>& t = *a.tape;
  MatX<S> v = MatX<S>::Zero(num_segments, a.value().cols());
  for (size_t e = 0; e < seg.size(); ++e) v.row(seg[e]) += a.value().row(e);
  return t.make(std::move(v), a.requires_grad(),
                [a, seg](Tape<S>& tp, const MatX<S>& g) {
                  MatX<S>* gx = tp.grad_buffer(a.id);
                  if (!gx) return;
                  for (size_t e = 0; e < seg.size(); ++e) gx->row(e) += g.row(seg[e]);
                });
}

// Fused gather + scatter-add: out.row(seg[e]) += a.row(idx[e]) over edges e.
// The workhorse of message passing; equivalent to
// segment_sum(gather_rows(a, idx), seg, num_segments) without the E-row
// intermediate.
template <typename S>
Var<S> gather_segment_sum(Var<S> a, std::vector<int> idx, std::vector<int> seg,
                          int num_segments) {
  Tape<S>& t = *a.tape;
  MatX<S> v = MatX<S>::Zero(num_segments, a.value().cols());
  for (size_t e = 0; e < idx.size(); ++e) v.row(seg[e]) += a.value().row(idx[e]);
  return t.make(std::move(v), a.requires_grad(),
                [a, idx, seg](Tape<S>& tp, const MatX<S>& g) {
                  MatX<S>* gx = tp.grad_buffer(a.id);
                  if (!gx) return;
                  for (size_t e = 0; e < idx.size(); ++e)
                    gx->row(idx[e]) += g.row(seg[e]);
                });
}

template <typename S>
Var<S> concat_cols(Var<S> a, Var<S> b) {
  Tape<S>& t = *a.tape;
  MatX<S> v(a.value().rows(), a.value().cols() + b.value().cols());
  v << a.value(), b.value();
  int ac = static_cast<int>(a.value().cols());
  return t.make(std::move(v), a.requires_grad() || b.requires_grad(),
                [a, b, ac](Tape<S>& tp, const MatX<S>& g) {
                  tp.accumulate_expr(a.id, g.leftCols(ac));
                  tp.accumulate_expr(b.id, g.rightCols(g.cols() - ac));
                });
}

template <typename S>
Var<S> cols_slice(Var<S> a, int start, int count) {
  Tape<S>& t = *a.tape;
  MatX<S> v = a.value().middleCols(start, count);
  return t.make(std::move(v), a.requires_grad(),
                [a, start, count](Tape<S>& tp, const MatX<S>& g) {
                  MatX<S>* gx = tp.grad_buffer(a.id);
                  if (!gx) return;
                  gx->middleCols(start, count) += g;
                });
}

// Row-wise y = x / (||x|| + eps). The epsilon guards zero rows.
template <typename S>
Var<S> l2_normalize_rows(Var<S> a, S eps = S(1e-12)) {
  Tape<S>& t = *a.tape;
  const MatX<S>& x = a.value();
  VecX<S> norms = x.rowwise().norm();
  MatX<S> v = x.array().colwise() / (norms.array() + eps);
  return t.make(std::move(v), a.requires_grad(),
                [a, eps](Tape<S>& tp, const MatX<S>& g) {
                  const MatX<S>& x = tp.value(a.id);
                  MatX<S>* gx = tp.grad_buffer(a.id);
                  if (!gx) return;
                  for (int i = 0; i < x.rows(); ++i) {
                    S n = x.row(i).norm();
                    S d = n + eps;
                    if (n > S(0)) {
                      S dot = g.row(i).dot(x.row(i));
                      gx->row(i) += g.row(i) / d - x.row(i) * (dot / (n * d * d));
                    } else {
                      gx->row(i) += g.row(i) / d;
                    }
                  }
                });
}

template <typename S>
Var<S> softmax_rows(Var<S> a) {
  Tape<S>& t = *a.tape;
  const MatX<S>& x = a.value();
  MatX<S> v(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    auto shifted = (x.row(i).array() - x.row(i).maxCoeff()).exp();
    v.row(i) = shifted / shifted.sum();
  }
  int out_hint = static_cast<int>(t.size());
  return t.make(std::move(v), a.requires_grad(),
                [a, out_hint](Tape<S>& tp, const MatX<S>& g) {
                  const MatX<S>& y = tp.value(out_hint);
                  MatX<S> gy = g.cwiseProduct(y);
                  VecX<S> row_dots = gy.rowwise().sum();
                  MatX<S> gx = gy - (y.array().colwise() * row_dots.array()).matrix();
                  tp.accumulate(a.id, gx);
                });
}

template <typename S>
Var<S> sum_all(Var<S> a) {
  Tape<S>& t = *a.tape;
  MatX<S> v(1, 1);
  v(0, 0) = a.value().sum();
  return t.make(std::move(v), a.requires_grad(),
                [a](Tape<S>& tp, const MatX<S>& g) {
                  tp.accumulate(a.id, MatX<S>::Constant(tp.value(a.id).rows(),
                                                        tp.value(a.id).cols(), g(0, 0)));
                });
}

template <typename S>
Var<S> mean_all(Var<S> a) {
  S inv = S(1) / S(a.value().size());
  return scale(sum_all(a), inv);
}

// Scales row i by w(i); w is a constant.
template <typename S>
Var<S> row_scale(Var<S> a, VecX<S> w) {
  Tape<S>& t = *a.tape;
  MatX<S> v = (a.value().array().colwise() * w.array()).matrix();
  return t.make(std::move(v), a.requires_grad(),
                [a, w](Tape<S>& tp, const MatX<S>& g) {
                  tp.accumulate(a.id, (g.array().colwise() * w.array()).matrix());
                });
}

// ---------------------------------------------------------------------------
// Loss compositions (targets are constants)
// ---------------------------------------------------------------------------

// Mean over rows of -sum_c target * log(prob); `target` is one-hot.
template <typename S>
Var<S> cross_entropy(Var<S> probs, const MatX<S>& target, S eps = S(1e-7)) {
  Tape<S>& t = *probs.tape;
  Var<S> lp = log_op(clamp_op(probs, eps, S(1)));
  Var<S> weighted = mul(lp, t.constant(-target));
  return scale(sum_all(weighted), S(1) / S(probs.value().rows()));
}

// Same numerator but summed over rows instead of averaged.
template <typename S>
Var<S> cross_entropy_sum(Var<S> probs, const MatX<S>& target, S eps = S(1e-7)) {
  Tape<S>& t = *probs.tape;
  Var<S> lp = log_op(clamp_op(probs, eps, S(1)));
  return sum_all(mul(lp, t.constant(-target)));
}

// Mean of -(y log p + (1-y) log(1-p)); p and y are column vectors.
template <typename S>
Var<S> binary_cross_entropy(Var<S> p, const MatX<S>& y, S eps = S(1e-7)) {
  Tape<S>& t = *p.tape;
  Var<S> lp = log_op(clamp_op(p, eps, S(1)));
  Var<S> lq = log_op(clamp_op(rsub_scalar(S(1), p), eps, S(1)));
  Var<S> loss = add(mul(lp, t.constant(-y)), mul(lq, t.constant((-(S(1) - y.array())).matrix())));
  return mean_all(loss);
}

template <typename S>
Var<S> mse(Var<S> a, const MatX<S>& target) {
  Tape<S>& t = *a.tape;
  Var<S> d = sub(a, t.constant(target));
  return mean_all(mul(d, d));
}

// ---------------------------------------------------------------------------
// Small layers
// ---------------------------------------------------------------------------

template <typename S>
Var<S> linear(Var<S> x, Var<S> w, Var<S> b) {
  return add_rowvec(matmul(x, w), b);
}

}  // namespace satnn
