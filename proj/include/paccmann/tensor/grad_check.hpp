//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <vector>

#include "paccmann/tensor/trace.hpp"

namespace paccmann::tensor {

// Compares the reverse-mode gradient of a scalar-valued traced function
// against central finite differences and returns the maximum relative error
// |g_ad - g_fd| / max(1, |g_ad|, |g_fd|) over all coordinates. Meant for
// 64-bit traces; the function must be deterministic across re-evaluations.
template <typename T, typename F>
T grad_check(F&& f, std::vector<Tensor<T>> point, T h = T(1e-5)) {
  for (auto& p : point) p.requires_grad = true;

  auto eval = [&](const std::vector<Tensor<T>>& at) {
    Trace<T> tr;
    std::vector<typename Trace<T>::Id> ids;
    ids.reserve(at.size());
    for (const auto& p : at) ids.push_back(tr.input(p));
    const auto root = f(tr, ids);
    return tr.value(root).data[0];
  };

  std::vector<Tensor<T>> ad_grads;
  {
    Trace<T> tr;
    std::vector<typename Trace<T>::Id> ids;
    for (const auto& p : point) ids.push_back(tr.input(p));
    const auto root = f(tr, ids);
    tr.backward(root);
    for (auto id : ids) ad_grads.push_back(tr.grad(id));
  }

  T worst = T(0);
  for (size_t i = 0; i < point.size(); ++i) {
    for (size_t j = 0; j < point[i].data.size(); ++j) {
      const T saved = point[i].data[j];
      point[i].data[j] = saved + h;
      const T up = eval(point);
      point[i].data[j] = saved - h;
      const T down = eval(point);
      point[i].data[j] = saved;
      const T fd = (up - down) / (T(2) * h);
      const T ad = ad_grads[i].data[j];
      const T rel = std::abs(ad - fd) /
                    std::max({T(1), std::abs(ad), std::abs(fd)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace paccmann::tensor
