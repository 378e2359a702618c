// Copyright 2026 The mlat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Reverse-mode automatic differentiation over dense matrices. A Tape owns
// nodes in construction order (a topological order); backward walks them in
// reverse. Gradients allocate lazily, so constant-heavy graphs stay cheap.

#ifndef MLAT_AUTODIFF_HPP_
#define MLAT_AUTODIFF_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mlat/mat.hpp"
#include "mlat/vocab_map.hpp"

namespace mlat::nn {

using mlat::Mat;

// A named trainable tensor with its gradient accumulator.
template <typename T>
struct Param {
  std::string name;
  Mat<T> w;
  Mat<T> g;

  void ensure_grad() {
    if (g.rows != w.rows || g.cols != w.cols) g = Mat<T>(w.rows, w.cols);
  }
  void zero_grad() {
    ensure_grad();
    std::fill(g.a.begin(), g.a.end(), T(0));
  }
};

template <typename T>
class Tape {
 public:
  // `self` is the id of the node whose backward is running.
  using BackFn = std::function<void(Tape&, int self)>;

  int push(Mat<T> val, BackFn back = nullptr) {
    nodes_.push_back(Node{std::move(val), Mat<T>(), std::move(back)});
    return static_cast<int>(nodes_.size()) - 1;
  }

  const Mat<T>& val(int id) const { return nodes_[id].val; }

  // Gradient accumulator of a node, allocated on first touch.
  Mat<T>& grad(int id) {
    Node& n = nodes_[id];
    if (n.grad.empty() && !n.val.empty()) n.grad = Mat<T>(n.val.rows, n.val.cols);
    return n.grad;
  }

  bool grad_touched(int id) const { return !nodes_[id].grad.empty(); }

  // Seeds d(loss) = 1 and propagates. `loss` must be a 1x1 node.
  void backward(int loss) {
    if (val(loss).rows != 1 || val(loss).cols != 1)
      throw NumericError("backward: loss node must be 1x1");
    grad(loss)(0, 0) = T(1);
    for (int id = loss; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.grad.empty() && n.back) n.back(*this, id);
    }
  }

  void clear() { nodes_.clear(); }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat<T> val;
    Mat<T> grad;  // empty until touched
    BackFn back;
  };
  std::vector<Node> nodes_;
};

namespace ops {

template <typename T>
int leaf(Tape<T>& t, Mat<T> v) {
  return t.push(std::move(v));
}

template <typename T>
int scalar(Tape<T>& t, T v) {
  Mat<T> m(1, 1);
  m(0, 0) = v;
  return t.push(std::move(m));
}

// Trainable leaf: backward flows into the parameter's grad buffer.
template <typename T>
int param_node(Tape<T>& t, Param<T>& p) {
  p.ensure_grad();
  Param<T>* pp = &p;
  return t.push(p.w, [pp](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    for (size_t i = 0; i < g.a.size(); ++i) pp->g.a[i] += g.a[i];
  });
}

// y = a * b
template <typename T>
int matmul(Tape<T>& t, int a, int b) {
  Mat<T> y;
  matops::gemm_nn(t.val(a), t.val(b), y);
  return t.push(std::move(y), [a, b](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    matops::gemm_nt(g, tp.val(b), tp.grad(a), /*accumulate=*/true);
    matops::gemm_tn(tp.val(a), g, tp.grad(b), /*accumulate=*/true);
  });
}

// y = a * b^T
template <typename T>
int matmul_nt(Tape<T>& t, int a, int b) {
  Mat<T> y;
  matops::gemm_nt(t.val(a), t.val(b), y);
  return t.push(std::move(y), [a, b](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    matops::gemm_nn(g, tp.val(b), tp.grad(a), /*accumulate=*/true);
    matops::gemm_tn(g, tp.val(a), tp.grad(b), /*accumulate=*/true);
  });
}

template <typename T>
int add(Tape<T>& t, int a, int b) {
  const Mat<T>&va = t.val(a), &vb = t.val(b);
  if (!va.same_shape(vb)) throw NumericError("add: shape mismatch");
  Mat<T> y = va;
  for (size_t i = 0; i < y.a.size(); ++i) y.a[i] += vb.a[i];
  return t.push(std::move(y), [a, b](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    Mat<T>&ga = tp.grad(a), &gb = tp.grad(b);
    for (size_t i = 0; i < g.a.size(); ++i) {
      ga.a[i] += g.a[i];
      gb.a[i] += g.a[i];
    }
  });
}

template <typename T>
int sub(Tape<T>& t, int a, int b) {
  const Mat<T>&va = t.val(a), &vb = t.val(b);
  if (!va.same_shape(vb)) throw NumericError("sub: shape mismatch");
  Mat<T> y = va;
  for (size_t i = 0; i < y.a.size(); ++i) y.a[i] -= vb.a[i];
  return t.push(std::move(y), [a, b](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    Mat<T>&ga = tp.grad(a), &gb = tp.grad(b);
    for (size_t i = 0; i < g.a.size(); ++i) {
      ga.a[i] += g.a[i];
      gb.a[i] -= g.a[i];
    }
  });
}

template <typename T>
int hadamard(Tape<T>& t, int a, int b) {
  const Mat<T>&va = t.val(a), &vb = t.val(b);
  if (!va.same_shape(vb)) throw NumericError("hadamard: shape mismatch");
  Mat<T> y = va;
  for (size_t i = 0; i < y.a.size(); ++i) y.a[i] *= vb.a[i];
  return t.push(std::move(y), [a, b](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    const Mat<T>&va2 = tp.val(a), &vb2 = tp.val(b);
    Mat<T>&ga = tp.grad(a), &gb = tp.grad(b);
    for (size_t i = 0; i < g.a.size(); ++i) {
      ga.a[i] += g.a[i] * vb2.a[i];
      gb.a[i] += g.a[i] * va2.a[i];
    }
  });
}

// Elementwise quotient.
template <typename T>
int div_elem(Tape<T>& t, int a, int b) {
  const Mat<T>&va = t.val(a), &vb = t.val(b);
  if (!va.same_shape(vb)) throw NumericError("div: shape mismatch");
  Mat<T> y = va;
  for (size_t i = 0; i < y.a.size(); ++i) y.a[i] /= vb.a[i];
  return t.push(std::move(y), [a, b](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    const Mat<T>&vy = tp.val(self), &vb2 = tp.val(b);
    Mat<T>&ga = tp.grad(a), &gb = tp.grad(b);
    for (size_t i = 0; i < g.a.size(); ++i) {
      ga.a[i] += g.a[i] / vb2.a[i];
      gb.a[i] -= g.a[i] * vy.a[i] / vb2.a[i];
    }
  });
}

// y = k*a + c, elementwise with scalar k, c.
template <typename T>
int affine(Tape<T>& t, int a, T k, T c) {
  Mat<T> y = t.val(a);
  for (auto& v : y.a) v = k * v + c;
  return t.push(std::move(y), [a, k](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    Mat<T>& ga = tp.grad(a);
    for (size_t i = 0; i < g.a.size(); ++i) ga.a[i] += k * g.a[i];
  });
}

template <typename T>
int scale(Tape<T>& t, int a, T k) {
  return affine(t, a, k, T(0));
}

template <typename T>
int tanh_(Tape<T>& t, int a) {
  Mat<T> y = t.val(a);
  for (auto& v : y.a) v = std::tanh(v);
  return t.push(std::move(y), [a](Tape<T>& tp, int self) {
    const Mat<T>&g = tp.grad(self), &vy = tp.val(self);
    Mat<T>& ga = tp.grad(a);
    for (size_t i = 0; i < g.a.size(); ++i) ga.a[i] += g.a[i] * (T(1) - vy.a[i] * vy.a[i]);
  });
}

template <typename T>
int sigmoid_(Tape<T>& t, int a) {
  Mat<T> y = t.val(a);
  for (auto& v : y.a) v = T(1) / (T(1) + std::exp(-v));
  return t.push(std::move(y), [a](Tape<T>& tp, int self) {
    const Mat<T>&g = tp.grad(self), &vy = tp.val(self);
    Mat<T>& ga = tp.grad(a);
    for (size_t i = 0; i < g.a.size(); ++i) ga.a[i] += g.a[i] * vy.a[i] * (T(1) - vy.a[i]);
  });
}

template <typename T>
int log_(Tape<T>& t, int a) {
  Mat<T> y = t.val(a);
  for (auto& v : y.a) v = std::log(v);
  return t.push(std::move(y), [a](Tape<T>& tp, int self) {
    const Mat<T>&g = tp.grad(self), &va = tp.val(a);
    Mat<T>& ga = tp.grad(a);
    for (size_t i = 0; i < g.a.size(); ++i) ga.a[i] += g.a[i] / va.a[i];
  });
}

template <typename T>
int sqrt_(Tape<T>& t, int a) {
  Mat<T> y = t.val(a);
  for (auto& v : y.a) v = std::sqrt(v);
  return t.push(std::move(y), [a](Tape<T>& tp, int self) {
    const Mat<T>&g = tp.grad(self), &vy = tp.val(self);
    Mat<T>& ga = tp.grad(a);
    for (size_t i = 0; i < g.a.size(); ++i) ga.a[i] += g.a[i] * T(0.5) / vy.a[i];
  });
}

// y = max(a, floor). Gradient passes only where a stays strictly above.
template <typename T>
int clamp_min(Tape<T>& t, int a, T floor) {
  Mat<T> y = t.val(a);
  for (auto& v : y.a) v = std::max(v, floor);
  return t.push(std::move(y), [a, floor](Tape<T>& tp, int self) {
    const Mat<T>&g = tp.grad(self), &va = tp.val(a);
    Mat<T>& ga = tp.grad(a);
    for (size_t i = 0; i < g.a.size(); ++i)
      if (va.a[i] > floor) ga.a[i] += g.a[i];
  });
}

template <typename T>
int softmax_rows(Tape<T>& t, int a) {
  Mat<T> y = matops::softmax_rows(t.val(a));
  return t.push(std::move(y), [a](Tape<T>& tp, int self) {
    const Mat<T>&g = tp.grad(self), &vy = tp.val(self);
    Mat<T>& ga = tp.grad(a);
    for (int r = 0; r < vy.rows; ++r) {
      T dot = T(0);
      for (int c = 0; c < vy.cols; ++c) dot += g(r, c) * vy(r, c);
      for (int c = 0; c < vy.cols; ++c) ga(r, c) += vy(r, c) * (g(r, c) - dot);
    }
  });
}

template <typename T>
int log_softmax_rows(Tape<T>& t, int a) {
  const Mat<T>& va = t.val(a);
  Mat<T> y(va.rows, va.cols);
  for (int r = 0; r < va.rows; ++r) {
    T mx = va(r, 0);
    for (int c = 1; c < va.cols; ++c) mx = std::max(mx, va(r, c));
    T lse = T(0);
    for (int c = 0; c < va.cols; ++c) lse += std::exp(va(r, c) - mx);
    lse = mx + std::log(lse);
    for (int c = 0; c < va.cols; ++c) y(r, c) = va(r, c) - lse;
  }
  return t.push(std::move(y), [a](Tape<T>& tp, int self) {
    const Mat<T>&g = tp.grad(self), &vy = tp.val(self);
    Mat<T>& ga = tp.grad(a);
    for (int r = 0; r < vy.rows; ++r) {
      T gsum = T(0);
      for (int c = 0; c < vy.cols; ++c) gsum += g(r, c);
      for (int c = 0; c < vy.cols; ++c)
        ga(r, c) += g(r, c) - std::exp(vy(r, c)) * gsum;
    }
  });
}

// One row of a as a 1 x cols node (embedding lookup).
template <typename T>
int row_select(Tape<T>& t, int a, int r) {
  const Mat<T>& va = t.val(a);
  if (r < 0 || r >= va.rows) throw NumericError("row_select: row out of range");
  Mat<T> y(1, va.cols);
  for (int c = 0; c < va.cols; ++c) y(0, c) = va(r, c);
  return t.push(std::move(y), [a, r](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    Mat<T>& ga = tp.grad(a);
    for (int c = 0; c < g.cols; ++c) ga(r, c) += g(0, c);
  });
}

// Vertically stacks nodes (each rows_i x cols).
template <typename T>
int concat_rows(Tape<T>& t, const std::vector<int>& parts) {
  if (parts.empty()) throw NumericError("concat_rows: empty list");
  int cols = t.val(parts[0]).cols;
  int rows = 0;
  for (int p : parts) {
    if (t.val(p).cols != cols) throw NumericError("concat_rows: column mismatch");
    rows += t.val(p).rows;
  }
  Mat<T> y(rows, cols);
  int r0 = 0;
  for (int p : parts) {
    const Mat<T>& vp = t.val(p);
    for (int r = 0; r < vp.rows; ++r)
      for (int c = 0; c < cols; ++c) y(r0 + r, c) = vp(r, c);
    r0 += vp.rows;
  }
  return t.push(std::move(y), [parts](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    int r0b = 0;
    for (int p : parts) {
      Mat<T>& gp = tp.grad(p);
      for (int r = 0; r < gp.rows; ++r)
        for (int c = 0; c < gp.cols; ++c) gp(r, c) += g(r0b + r, c);
      r0b += gp.rows;
    }
  });
}

// Horizontal concatenation of two nodes with equal row counts.
template <typename T>
int concat_cols(Tape<T>& t, int a, int b) {
  const Mat<T>&va = t.val(a), &vb = t.val(b);
  if (va.rows != vb.rows) throw NumericError("concat_cols: row mismatch");
  Mat<T> y(va.rows, va.cols + vb.cols);
  for (int r = 0; r < va.rows; ++r) {
    for (int c = 0; c < va.cols; ++c) y(r, c) = va(r, c);
    for (int c = 0; c < vb.cols; ++c) y(r, va.cols + c) = vb(r, c);
  }
  return t.push(std::move(y), [a, b](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    Mat<T>&ga = tp.grad(a), &gb = tp.grad(b);
    for (int r = 0; r < ga.rows; ++r) {
      for (int c = 0; c < ga.cols; ++c) ga(r, c) += g(r, c);
      for (int c = 0; c < gb.cols; ++c) gb(r, c) += g(r, ga.cols + c);
    }
  });
}

// Mean over rows: rows x cols -> 1 x cols.
template <typename T>
int mean_rows(Tape<T>& t, int a) {
  const Mat<T>& va = t.val(a);
  Mat<T> y(1, va.cols);
  for (int r = 0; r < va.rows; ++r)
    for (int c = 0; c < va.cols; ++c) y(0, c) += va(r, c);
  for (int c = 0; c < va.cols; ++c) y(0, c) /= T(va.rows);
  return t.push(std::move(y), [a](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    Mat<T>& ga = tp.grad(a);
    T inv = T(1) / T(ga.rows);
    for (int r = 0; r < ga.rows; ++r)
      for (int c = 0; c < ga.cols; ++c) ga(r, c) += g(0, c) * inv;
  });
}

// Mean over all entries -> 1 x 1.
template <typename T>
int mean_all(Tape<T>& t, int a) {
  const Mat<T>& va = t.val(a);
  Mat<T> y(1, 1);
  for (T v : va.a) y(0, 0) += v;
  y(0, 0) /= T(va.size());
  return t.push(std::move(y), [a](Tape<T>& tp, int self) {
    T g = tp.grad(self)(0, 0);
    Mat<T>& ga = tp.grad(a);
    T inv = g / T(ga.size());
    for (auto& v : ga.a) v += inv;
  });
}

// y[t] = a(t, idx[t]) as a T x 1 node.
template <typename T>
int gather_rows(Tape<T>& t, int a, std::vector<int> idx) {
  const Mat<T>& va = t.val(a);
  if (static_cast<int>(idx.size()) != va.rows)
    throw NumericError("gather_rows: index count != rows");
  Mat<T> y(va.rows, 1);
  for (int r = 0; r < va.rows; ++r) {
    if (idx[r] < 0 || idx[r] >= va.cols) throw NumericError("gather_rows: index out of range");
    y(r, 0) = va(r, idx[r]);
  }
  return t.push(std::move(y), [a, idx = std::move(idx)](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    Mat<T>& ga = tp.grad(a);
    for (int r = 0; r < g.rows; ++r) ga(r, idx[r]) += g(r, 0);
  });
}

// Single entry as a 1 x 1 node.
template <typename T>
int pick(Tape<T>& t, int a, int r, int c) {
  const Mat<T>& va = t.val(a);
  if (r < 0 || r >= va.rows || c < 0 || c >= va.cols)
    throw NumericError("pick: index out of range");
  Mat<T> y(1, 1);
  y(0, 0) = va(r, c);
  return t.push(std::move(y), [a, r, c](Tape<T>& tp, int self) {
    tp.grad(a)(r, c) += tp.grad(self)(0, 0);
  });
}

// P (T x |V_src|) times a constant sparse vocabulary map -> T x |V_dst|.
// The map must outlive the tape.
template <typename T>
int map_vocab(Tape<T>& t, int p, const VocabMapMatrix* m) {
  const Mat<T>& vp = t.val(p);
  if (vp.cols != m->src_size()) throw NumericError("map_vocab: P columns != src size");
  Mat<T> y(vp.rows, m->dst_size());
  for (const auto& e : m->entries()) {
    T w = static_cast<T>(e.weight());
    for (int r = 0; r < vp.rows; ++r) y(r, e.col) += vp(r, e.row) * w;
  }
  return t.push(std::move(y), [p, m](Tape<T>& tp, int self) {
    const Mat<T>& g = tp.grad(self);
    Mat<T>& gp = tp.grad(p);
    for (const auto& e : m->entries()) {
      T w = static_cast<T>(e.weight());
      for (int r = 0; r < gp.rows; ++r) gp(r, e.row) += g(r, e.col) * w;
    }
  });
}

// Threshold gates on 1 x 1 scores. The gate is decided by the forward value;
// a clipped score contributes exactly zero gradient.
template <typename T>
int clip_below_node(Tape<T>& t, int a, T beta) {
  const Mat<T>& va = t.val(a);
  if (va.rows != 1 || va.cols != 1) throw NumericError("clip_below: scalar expected");
  bool keep = va(0, 0) < beta;
  Mat<T> y(1, 1);
  y(0, 0) = keep ? va(0, 0) : T(0);
  return t.push(std::move(y), [a, keep](Tape<T>& tp, int self) {
    if (keep) tp.grad(a)(0, 0) += tp.grad(self)(0, 0);
  });
}

template <typename T>
int clip_above_node(Tape<T>& t, int a, T beta) {
  const Mat<T>& va = t.val(a);
  if (va.rows != 1 || va.cols != 1) throw NumericError("clip_above: scalar expected");
  bool keep = va(0, 0) > beta;
  Mat<T> y(1, 1);
  y(0, 0) = keep ? va(0, 0) : T(0);
  return t.push(std::move(y), [a, keep](Tape<T>& tp, int self) {
    if (keep) tp.grad(a)(0, 0) += tp.grad(self)(0, 0);
  });
}

// cosine(a, b) for two 1 x d nodes, guarded against zero norms.
template <typename T>
int cosine_node(Tape<T>& t, int a, int b) {
  int ab = matmul_nt(t, a, b);                                    // 1x1
  int na = sqrt_(t, clamp_min(t, matmul_nt(t, a, a), T(1e-24)));  // 1x1
  int nb = sqrt_(t, clamp_min(t, matmul_nt(t, b, b), T(1e-24)));
  return div_elem(t, ab, hadamard(t, na, nb));
}

// Sum of scalar nodes, then optional scaling; handy for means of objectives.
template <typename T>
int sum_scalars(Tape<T>& t, const std::vector<int>& xs) {
  if (xs.empty()) throw NumericError("sum_scalars: empty list");
  int acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = add(t, acc, xs[i]);
  return acc;
}

template <typename T>
int mean_scalars(Tape<T>& t, const std::vector<int>& xs) {
  return scale(t, sum_scalars(t, xs), T(1) / T(xs.size()));
}

}  // namespace ops

// Binds model parameters into a tape. Trainable parameters become gradient
// sinks; frozen ones enter as plain constants, which structurally guarantees
// their weights cannot change through training.
template <typename T>
class Binder {
 public:
  Binder(Tape<T>* tape, bool trainable) : tape_(tape), trainable_(trainable) {}

  int operator()(const Param<T>& p) {
    auto it = memo_.find(&p);
    if (it != memo_.end()) return it->second;
    int id = trainable_ ? ops::param_node(*tape_, const_cast<Param<T>&>(p))
                        : ops::leaf(*tape_, p.w);
    memo_.emplace(&p, id);
    return id;
  }

  Tape<T>& tape() { return *tape_; }
  bool trainable() const { return trainable_; }

 private:
  Tape<T>* tape_;
  bool trainable_;
  std::unordered_map<const void*, int> memo_;
};

}  // namespace mlat::nn

#endif  // MLAT_AUTODIFF_HPP_
