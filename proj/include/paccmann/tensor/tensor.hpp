//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "paccmann/common/error.hpp"

namespace paccmann::tensor {

struct ShapeMismatch : common::Error {
  using Error::Error;
};
struct AllMasked : common::Error {
  using Error::Error;
};
struct BatchTooSmall : common::Error {
  using Error::Error;
};
struct SequenceTooShort : common::Error {
  using Error::Error;
};
struct IndexOutOfRange : common::Error {
  using Error::Error;
};

// Dense row-major matrix; vectors are 1×n or n×1. The engine is rank-2:
// batched sequences are stacked as [batch*seq_len × channels] blocks.
template <typename T>
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;
  bool requires_grad = false;

  Tensor() = default;
  Tensor(int r, int c, T fill = T(0))
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  static Tensor from(int r, int c, std::initializer_list<T> values) {
    Tensor t(r, c);
    if (values.size() != t.data.size()) {
      throw ShapeMismatch("initializer size does not match " +
                          std::to_string(r) + "x" + std::to_string(c));
    }
    std::copy(values.begin(), values.end(), t.data.begin());
    return t;
  }

  T& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  const T& at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  size_t size() const { return data.size(); }
  std::vector<int> shape() const { return {rows, cols}; }
  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }

  bool all_finite() const {
    for (T v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }
};

template <typename T>
Tensor<T> require_grad(Tensor<T> t) {
  t.requires_grad = true;
  return t;
}

}  // namespace paccmann::tensor
