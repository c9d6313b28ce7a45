//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>

#include "paccmann/tensor/tensor.hpp"

namespace paccmann::tensor {

template <typename T>
struct AdamState {
  Tensor<T> m;
  Tensor<T> v;
  long t = 0;
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);

  static AdamState make(const Tensor<T>& param) {
    AdamState s;
    s.m = Tensor<T>(param.rows, param.cols, T(0));
    s.v = Tensor<T>(param.rows, param.cols, T(0));
    return s;
  }
};

// Bias-corrected Adam update, in place.
template <typename T>
void adam_step(Tensor<T>& param, const Tensor<T>& grad, AdamState<T>& state,
               T lr) {
  if (!param.same_shape(grad) || !param.same_shape(state.m)) {
    throw ShapeMismatch("adam_step: param/grad/state shapes differ");
  }
  state.t += 1;
  const T bc1 = T(1) - std::pow(state.beta1, static_cast<T>(state.t));
  const T bc2 = T(1) - std::pow(state.beta2, static_cast<T>(state.t));
  for (size_t i = 0; i < param.data.size(); ++i) {
    const T g = grad.data[i];
    state.m.data[i] = state.beta1 * state.m.data[i] + (T(1) - state.beta1) * g;
    state.v.data[i] =
        state.beta2 * state.v.data[i] + (T(1) - state.beta2) * g * g;
    const T mhat = state.m.data[i] / bc1;
    const T vhat = state.v.data[i] / bc2;
    param.data[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

// Stepwise exponential decay: lr(step) = initial * factor^(step / every).
struct LrSchedule {
  double initial_lr = 1e-3;
  double decay_factor = 0.96;
  long decay_every = 5000;

  double lr(long step) const {
    return initial_lr * std::pow(decay_factor, static_cast<double>(
                                                   step / decay_every));
  }
};

}  // namespace paccmann::tensor
