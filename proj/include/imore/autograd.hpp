// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_AUTOGRAD_HPP
#define IMORE_AUTOGRAD_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "imore/tensor.hpp"

namespace imore {

// Reverse-mode tape over dense matrices. Values are computed eagerly; each
// node carries a closure that scatters its output gradient to its parents.
// Parameter leaves reference external storage, so a forward pass never copies
// weights. Closures capture Vars (tape ids), never matrix references.

template <class T>
class Tape;

template <class T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;
};

template <class T>
class Tape {
 public:
  /// Leaf owning its value (inputs, constants).
  Var<T> value(Mat<T> v) {
    nodes_.push_back(Node{nullptr, std::move(v), {}, {}});
    return {this, static_cast<int>(nodes_.size() - 1)};
  }

  /// Leaf referencing external storage (parameters). The pointee must outlive
  /// the tape.
  Var<T> external(const Mat<T>* v) {
    nodes_.push_back(Node{v, {}, {}, {}});
    return {this, static_cast<int>(nodes_.size() - 1)};
  }

  void set_back(Var<T> v, std::function<void(Tape&)> back) {
    nodes_.at(v.id).back = std::move(back);
  }

  const Mat<T>& val(Var<T> v) const {
    const Node& n = nodes_.at(v.id);
    return n.ext ? *n.ext : n.value;
  }

  /// Gradient buffer, zero-allocated on first touch.
  Mat<T>& grad(Var<T> v) {
    Node& n = nodes_.at(v.id);
    if (n.grad.size() == 0) n.grad = Mat<T>::Zero(val(v).rows(), val(v).cols());
    return n.grad;
  }

  bool grad_touched(Var<T> v) const { return nodes_.at(v.id).grad.size() != 0; }

  void backward(Var<T> root) {
    const Mat<T>& rv = val(root);
    if (rv.rows() != 1 || rv.cols() != 1) throw ShapeError("backward root must be a scalar");
    grad(root)(0, 0) = static_cast<T>(1);
    for (int id = root.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.grad.size() != 0 && n.back) n.back(*this);
    }
  }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    const Mat<T>* ext;
    Mat<T> value;
    Mat<T> grad;
    std::function<void(Tape&)> back;
  };
  std::vector<Node> nodes_;
};

namespace detail {
inline void require(bool cond, const std::string& what) {
  if (!cond) throw ShapeError(what);
}
}  // namespace detail

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  detail::require(same_shape(t.val(a), t.val(b)), "add: shape mismatch");
  Mat<T> out = t.val(a) + t.val(b);
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a, b](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    tp.grad(a) += go;
    tp.grad(b) += go;
  });
  return o;
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  detail::require(same_shape(t.val(a), t.val(b)), "sub: shape mismatch");
  Mat<T> out = t.val(a) - t.val(b);
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a, b](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    tp.grad(a) += go;
    tp.grad(b) -= go;
  });
  return o;
}

template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  detail::require(same_shape(t.val(a), t.val(b)), "mul: shape mismatch");
  Mat<T> out = t.val(a).cwiseProduct(t.val(b));
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a, b](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    tp.grad(a) += go.cwiseProduct(tp.val(b));
    tp.grad(b) += go.cwiseProduct(tp.val(a));
  });
  return o;
}

template <class T>
Var<T> scale(Var<T> a, T factor) {
  Tape<T>& t = *a.tape;
  Mat<T> out = t.val(a) * factor;
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a, factor](Tape<T>& tp) { tp.grad(a) += tp.grad(o) * factor; });
  return o;
}

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  detail::require(t.val(a).cols() == t.val(b).rows(), "matmul: inner dims differ");
  Mat<T> out = t.val(a) * t.val(b);
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a, b](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    tp.grad(a) += go * tp.val(b).transpose();
    tp.grad(b) += tp.val(a).transpose() * go;
  });
  return o;
}

/// a * b^T without materializing the transpose node.
template <class T>
Var<T> matmul_nt(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  detail::require(t.val(a).cols() == t.val(b).cols(), "matmul_nt: inner dims differ");
  Mat<T> out = t.val(a) * t.val(b).transpose();
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a, b](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    tp.grad(a) += go * tp.val(b);
    tp.grad(b) += go.transpose() * tp.val(a);
  });
  return o;
}

/// Broadcast-add a 1 x c row vector to every row.
template <class T>
Var<T> add_rowvec(Var<T> a, Var<T> v) {
  Tape<T>& t = *a.tape;
  detail::require(t.val(v).rows() == 1 && t.val(v).cols() == t.val(a).cols(),
                  "add_rowvec: expected a 1 x cols row vector");
  Mat<T> out = t.val(a).rowwise() + t.val(v).row(0);
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a, v](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    tp.grad(a) += go;
    tp.grad(v) += go.colwise().sum();
  });
  return o;
}

/// x * W + b (b broadcast per row); b may be invalid for a bias-free layer.
template <class T>
Var<T> linear(Var<T> x, Var<T> W, Var<T> b = {}) {
  Var<T> y = matmul(x, W);
  if (b.tape == nullptr) return y;
  return add_rowvec(y, b);
}

template <class T>
Var<T> relu(Var<T> a) {
  Tape<T>& t = *a.tape;
  Mat<T> out = t.val(a).cwiseMax(static_cast<T>(0));
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a](Tape<T>& tp) {
    const Mat<T>& x = tp.val(a);
    const Mat<T> go = tp.grad(o);
    tp.grad(a) += go.cwiseProduct(
        (x.array() > static_cast<T>(0)).template cast<T>().matrix());
  });
  return o;
}

template <class T>
Var<T> tanh_op(Var<T> a) {
  Tape<T>& t = *a.tape;
  Mat<T> out = t.val(a).array().tanh().matrix();
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a](Tape<T>& tp) {
    const Mat<T>& y = tp.val(o);
    const Mat<T> go = tp.grad(o);
    tp.grad(a) += go.cwiseProduct((1 - y.array().square()).matrix());
  });
  return o;
}

template <class T>
Var<T> softmax_rows(Var<T> a) {
  Tape<T>& t = *a.tape;
  const Mat<T>& x = t.val(a);
  Mat<T> y(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    const T m = x.row(r).maxCoeff();
    Eigen::Array<T, 1, Eigen::Dynamic> e = (x.row(r).array() - m).exp();
    y.row(r) = (e / e.sum()).matrix();
  }
  Var<T> o = t.value(std::move(y));
  t.set_back(o, [o, a](Tape<T>& tp) {
    const Mat<T>& yv = tp.val(o);
    const Mat<T> go = tp.grad(o);
    Mat<T>& ga = tp.grad(a);
    for (int r = 0; r < yv.rows(); ++r) {
      const T dot = go.row(r).dot(yv.row(r));
      ga.row(r) += (go.row(r).array() - dot).matrix().cwiseProduct(yv.row(r));
    }
  });
  return o;
}

/// Row-wise layer norm with learnable gain/bias (1 x cols each), eps 1e-5.
template <class T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias) {
  Tape<T>& t = *x.tape;
  const Mat<T>& xv = t.val(x);
  const int cols = static_cast<int>(xv.cols());
  detail::require(t.val(gain).rows() == 1 && t.val(gain).cols() == cols &&
                      t.val(bias).rows() == 1 && t.val(bias).cols() == cols,
                  "layer_norm: gain/bias must be 1 x cols");
  const T eps = static_cast<T>(1e-5);
  Mat<T> xhat(xv.rows(), cols);
  Mat<T> inv_std(xv.rows(), 1);
  for (int r = 0; r < xv.rows(); ++r) {
    const T mean = xv.row(r).mean();
    const T var = (xv.row(r).array() - mean).square().sum() / cols;
    const T is = static_cast<T>(1) / std::sqrt(var + eps);
    inv_std(r, 0) = is;
    xhat.row(r) = ((xv.row(r).array() - mean) * is).matrix();
  }
  Mat<T> out(xv.rows(), cols);
  for (int r = 0; r < xv.rows(); ++r) {
    out.row(r) = xhat.row(r).cwiseProduct(t.val(gain).row(0)) + t.val(bias).row(0);
  }
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, x, gain, bias, xhat, inv_std](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    const int n = static_cast<int>(go.cols());
    Mat<T>& gx = tp.grad(x);
    Mat<T>& gg = tp.grad(gain);
    Mat<T>& gb = tp.grad(bias);
    const Mat<T>& g = tp.val(gain);
    for (int r = 0; r < go.rows(); ++r) {
      gg.row(0) += go.row(r).cwiseProduct(xhat.row(r));
      gb.row(0) += go.row(r);
      const Mat<T> dxhat = go.row(r).cwiseProduct(g.row(0));
      const T sum_dxhat = dxhat.sum();
      const T sum_dxhat_xhat = dxhat.cwiseProduct(xhat.row(r)).sum();
      gx.row(r) += (inv_std(r, 0) / n) *
                   (n * dxhat.array() - sum_dxhat - xhat.row(r).array() * sum_dxhat_xhat)
                       .matrix();
    }
  });
  return o;
}

/// Inverted dropout; rng == nullptr (eval mode) is the identity.
template <class T>
Var<T> dropout(Var<T> x, T rate, Rng* rng) {
  if (rng == nullptr || rate <= static_cast<T>(0)) return x;
  Tape<T>& t = *x.tape;
  const Mat<T>& xv = t.val(x);
  const T inv_keep = static_cast<T>(1) / (static_cast<T>(1) - rate);
  Mat<T> mask(xv.rows(), xv.cols());
  for (int r = 0; r < xv.rows(); ++r) {
    for (int c = 0; c < xv.cols(); ++c) {
      mask(r, c) = rng->uniform() < static_cast<double>(rate) ? static_cast<T>(0) : inv_keep;
    }
  }
  Mat<T> out = xv.cwiseProduct(mask);
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, x, mask](Tape<T>& tp) {
    tp.grad(x) += tp.grad(o).cwiseProduct(mask);
  });
  return o;
}

/// Gathers table rows; gradients scatter-add back into the table.
template <class T>
Var<T> embedding_rows(Var<T> table, std::vector<int> ids) {
  Tape<T>& t = *table.tape;
  const Mat<T>& tv = t.val(table);
  Mat<T> out(static_cast<int>(ids.size()), tv.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    detail::require(ids[i] >= 0 && ids[i] < tv.rows(), "embedding_rows: id out of range");
    out.row(static_cast<int>(i)) = tv.row(ids[i]);
  }
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, table, ids](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    Mat<T>& gt = tp.grad(table);
    for (size_t i = 0; i < ids.size(); ++i) {
      gt.row(ids[i]) += go.row(static_cast<int>(i));
    }
  });
  return o;
}

template <class T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
  detail::require(!parts.empty(), "concat_rows: empty input");
  Tape<T>& t = *parts[0].tape;
  int rows = 0;
  const int cols = static_cast<int>(t.val(parts[0]).cols());
  for (const auto& p : parts) {
    detail::require(t.val(p).cols() == cols, "concat_rows: column mismatch");
    rows += static_cast<int>(t.val(p).rows());
  }
  Mat<T> out(rows, cols);
  int r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, t.val(p).rows()) = t.val(p);
    r += static_cast<int>(t.val(p).rows());
  }
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, parts](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    int at = 0;
    for (const auto& p : parts) {
      const int n = static_cast<int>(tp.val(p).rows());
      tp.grad(p) += go.middleRows(at, n);
      at += n;
    }
  });
  return o;
}

template <class T>
Var<T> slice_rows(Var<T> a, int start, int count) {
  Tape<T>& t = *a.tape;
  detail::require(start >= 0 && count > 0 && start + count <= t.val(a).rows(),
                  "slice_rows: range out of bounds");
  Mat<T> out = t.val(a).middleRows(start, count);
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a, start, count](Tape<T>& tp) {
    tp.grad(a).middleRows(start, count) += tp.grad(o);
  });
  return o;
}

template <class T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  detail::require(!parts.empty(), "concat_cols: empty input");
  Tape<T>& t = *parts[0].tape;
  int cols = 0;
  const int rows = static_cast<int>(t.val(parts[0]).rows());
  for (const auto& p : parts) {
    detail::require(t.val(p).rows() == rows, "concat_cols: row mismatch");
    cols += static_cast<int>(t.val(p).cols());
  }
  Mat<T> out(rows, cols);
  int c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, t.val(p).cols()) = t.val(p);
    c += static_cast<int>(t.val(p).cols());
  }
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, parts](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    int at = 0;
    for (const auto& p : parts) {
      const int n = static_cast<int>(tp.val(p).cols());
      tp.grad(p) += go.middleCols(at, n);
      at += n;
    }
  });
  return o;
}

template <class T>
Var<T> slice_cols(Var<T> a, int start, int count) {
  Tape<T>& t = *a.tape;
  detail::require(start >= 0 && count > 0 && start + count <= t.val(a).cols(),
                  "slice_cols: range out of bounds");
  Mat<T> out = t.val(a).middleCols(start, count);
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a, start, count](Tape<T>& tp) {
    tp.grad(a).middleCols(start, count) += tp.grad(o);
  });
  return o;
}

template <class T>
Var<T> mean_rows(Var<T> a) {
  Tape<T>& t = *a.tape;
  Mat<T> out = t.val(a).colwise().mean();
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, a](Tape<T>& tp) {
    const Mat<T> go = tp.grad(o);
    const T inv = static_cast<T>(1) / static_cast<T>(tp.val(a).rows());
    tp.grad(a).rowwise() += (go.row(0) * inv);
  });
  return o;
}

/// -log softmax(logits)[target] for a single-row logits matrix.
template <class T>
Var<T> cross_entropy(Var<T> logits, int target) {
  Tape<T>& t = *logits.tape;
  const Mat<T>& x = t.val(logits);
  detail::require(x.rows() == 1, "cross_entropy: logits must be a single row");
  detail::require(target >= 0 && target < x.cols(), "cross_entropy: target out of range");
  const T m = x.row(0).maxCoeff();
  Eigen::Array<T, 1, Eigen::Dynamic> e = (x.row(0).array() - m).exp();
  const T z = e.sum();
  Mat<T> p = (e / z).matrix();
  Mat<T> out(1, 1);
  out(0, 0) = std::log(z) + m - x(0, target);
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, logits, target, p](Tape<T>& tp) {
    const T go = tp.grad(o)(0, 0);
    Mat<T>& gl = tp.grad(logits);
    gl.row(0) += go * p.row(0);
    gl(0, target) -= go;
  });
  return o;
}

template <class T>
Var<T> add_scalars(const std::vector<Var<T>>& scalars) {
  detail::require(!scalars.empty(), "add_scalars: empty input");
  Tape<T>& t = *scalars[0].tape;
  Mat<T> out = Mat<T>::Zero(1, 1);
  for (const auto& s : scalars) {
    detail::require(t.val(s).rows() == 1 && t.val(s).cols() == 1, "add_scalars: non-scalar");
    out(0, 0) += t.val(s)(0, 0);
  }
  Var<T> o = t.value(std::move(out));
  t.set_back(o, [o, scalars](Tape<T>& tp) {
    const T go = tp.grad(o)(0, 0);
    for (const auto& s : scalars) tp.grad(s)(0, 0) += go;
  });
  return o;
}

template <class T>
struct AttentionOut {
  Var<T> output;
  Var<T> weights;  // softmax(Q K^T / sqrt(d)), returned for tracing
};

/// Scaled dot-product attention; weights are exposed as a graph node so they
/// stay differentiable and traceable.
template <class T>
AttentionOut<T> attention(Var<T> q, Var<T> k, Var<T> v) {
  Tape<T>& t = *q.tape;
  detail::require(t.val(q).cols() == t.val(k).cols(), "attention: q/k width mismatch");
  detail::require(t.val(k).rows() == t.val(v).rows(), "attention: k/v length mismatch");
  const T inv_sqrt_d = static_cast<T>(1.0 / std::sqrt(static_cast<double>(t.val(q).cols())));
  Var<T> scores = scale(matmul_nt(q, k), inv_sqrt_d);
  Var<T> weights = softmax_rows(scores);
  Var<T> out = matmul(weights, v);
  return {out, weights};
}

}  // namespace imore

#endif
