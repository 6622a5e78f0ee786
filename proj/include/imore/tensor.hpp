// Copyright (c) 2026 The imore authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef IMORE_TENSOR_HPP
#define IMORE_TENSOR_HPP

#include <Eigen/Core>

#include "imore/errors.hpp"
#include "imore/rng.hpp"

namespace imore {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
bool same_shape(const Mat<T>& a, const Mat<T>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

template <class T>
Mat<T> random_normal(int rows, int cols, double stddev, Rng& rng) {
  Mat<T> m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = static_cast<T>(rng.normal(0.0, stddev));
  }
  return m;
}

template <class T>
Mat<T> xavier_uniform(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  Mat<T> m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = static_cast<T>((rng.uniform() * 2.0 - 1.0) * bound);
    }
  }
  return m;
}

}  // namespace imore

#endif
