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

#ifndef MLAT_MAT_HPP_
#define MLAT_MAT_HPP_

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mlat/error.hpp"

namespace mlat {

// Dense row-major matrix. Deliberately minimal: the training stack runs on
// matrices small enough that hand-rolled loops beat any dependency.
template <typename T>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<T> a;

  Mat() = default;
  Mat(int r, int c, T fill = T(0)) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

  T& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  const T& operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  T* row_ptr(int r) { return a.data() + static_cast<size_t>(r) * cols; }
  const T* row_ptr(int r) const { return a.data() + static_cast<size_t>(r) * cols; }

  size_t size() const { return a.size(); }
  bool empty() const { return a.empty(); }

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  template <typename U>
  Mat<U> cast() const {
    Mat<U> out(rows, cols);
    for (size_t i = 0; i < a.size(); ++i) out.a[i] = static_cast<U>(a[i]);
    return out;
  }
};

namespace matops {

template <typename T>
inline void check_mul(const Mat<T>& x, const Mat<T>& y) {
  if (x.cols != y.rows) throw NumericError("matmul shape mismatch");
}

// y = a * b
template <typename T>
inline void gemm_nn(const Mat<T>& x, const Mat<T>& y, Mat<T>& out, bool accumulate = false) {
  check_mul(x, y);
  if (!accumulate) out = Mat<T>(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int k = 0; k < x.cols; ++k) {
      T xv = x(i, k);
      if (xv == T(0)) continue;
      const T* yr = y.row_ptr(k);
      T* outr = out.row_ptr(i);
      for (int j = 0; j < y.cols; ++j) outr[j] += xv * yr[j];
    }
  }
}

// y = a * b^T
template <typename T>
inline void gemm_nt(const Mat<T>& x, const Mat<T>& y, Mat<T>& out, bool accumulate = false) {
  if (x.cols != y.cols) throw NumericError("matmul_nt shape mismatch");
  if (!accumulate) out = Mat<T>(x.rows, y.rows);
  for (int i = 0; i < x.rows; ++i) {
    for (int j = 0; j < y.rows; ++j) {
      const T* xr = x.row_ptr(i);
      const T* yr = y.row_ptr(j);
      T s = T(0);
      for (int k = 0; k < x.cols; ++k) s += xr[k] * yr[k];
      out(i, j) += s;
    }
  }
}

// y = a^T * b
template <typename T>
inline void gemm_tn(const Mat<T>& x, const Mat<T>& y, Mat<T>& out, bool accumulate = false) {
  if (x.rows != y.rows) throw NumericError("matmul_tn shape mismatch");
  if (!accumulate) out = Mat<T>(x.cols, y.cols);
  for (int k = 0; k < x.rows; ++k) {
    for (int i = 0; i < x.cols; ++i) {
      T xv = x(k, i);
      if (xv == T(0)) continue;
      const T* yr = y.row_ptr(k);
      T* outr = out.row_ptr(i);
      for (int j = 0; j < y.cols; ++j) outr[j] += xv * yr[j];
    }
  }
}

template <typename T>
inline Mat<T> matmul(const Mat<T>& x, const Mat<T>& y) {
  Mat<T> out;
  gemm_nn(x, y, out);
  return out;
}

template <typename T>
inline void softmax_row_inplace(T* p, int n) {
  T mx = p[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, p[i]);
  T s = T(0);
  for (int i = 0; i < n; ++i) {
    p[i] = std::exp(p[i] - mx);
    s += p[i];
  }
  for (int i = 0; i < n; ++i) p[i] /= s;
}

template <typename T>
inline Mat<T> softmax_rows(const Mat<T>& x) {
  Mat<T> out = x;
  for (int r = 0; r < out.rows; ++r) softmax_row_inplace(out.row_ptr(r), out.cols);
  return out;
}

template <typename T>
inline int argmax_row(const Mat<T>& x, int r) {
  int best = 0;
  for (int j = 1; j < x.cols; ++j)
    if (x(r, j) > x(r, best)) best = j;
  return best;
}

template <typename T>
inline T dot(const std::vector<T>& x, const std::vector<T>& y) {
  assert(x.size() == y.size());
  T s = T(0);
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

template <typename T>
inline T norm2(const std::vector<T>& x) {
  return std::sqrt(dot(x, x));
}

// Cosine similarity of two equal-length vectors; throws on a zero-norm input.
template <typename T>
inline T cosine(const std::vector<T>& x, const std::vector<T>& y) {
  T nx = norm2(x), ny = norm2(y);
  if (nx == T(0) || ny == T(0)) throw NumericError("cosine of zero-norm embedding");
  return dot(x, y) / (nx * ny);
}

}  // namespace matops
}  // namespace mlat

#endif  // MLAT_MAT_HPP_
