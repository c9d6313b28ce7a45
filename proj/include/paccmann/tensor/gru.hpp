//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "paccmann/tensor/trace.hpp"

namespace paccmann::tensor {

// Gated recurrent unit parameters: input projections [H x H_in], recurrent
// projections [H x H], biases [1 x H].
template <typename T>
struct GruParams {
  Tensor<T> w_z, w_r, w_h;
  Tensor<T> u_z, u_r, u_h;
  Tensor<T> b_z, b_r, b_h;

  static GruParams make(int h, int h_in) {
    GruParams p;
    p.w_z = Tensor<T>(h, h_in);
    p.w_r = Tensor<T>(h, h_in);
    p.w_h = Tensor<T>(h, h_in);
    p.u_z = Tensor<T>(h, h);
    p.u_r = Tensor<T>(h, h);
    p.u_h = Tensor<T>(h, h);
    p.b_z = Tensor<T>(1, h);
    p.b_r = Tensor<T>(1, h);
    p.b_h = Tensor<T>(1, h);
    return p;
  }
};

template <typename T>
struct GruParamIds {
  typename Trace<T>::Id w_z, w_r, w_h, u_z, u_r, u_h, b_z, b_r, b_h;
};

template <typename T>
GruParamIds<T> register_gru(Trace<T>& tr, const GruParams<T>& p) {
  return GruParamIds<T>{tr.input(p.w_z), tr.input(p.w_r), tr.input(p.w_h),
                        tr.input(p.u_z), tr.input(p.u_r), tr.input(p.u_h),
                        tr.input(p.b_z), tr.input(p.b_r), tr.input(p.b_h)};
}

// One GRU step on a batch: x [B x H_in], h [B x H] -> h' [B x H].
//   z = sigmoid(x Wz^T + h Uz^T + bz)
//   r = sigmoid(x Wr^T + h Ur^T + br)
//   h~ = tanh(x Wh^T + (r . h) Uh^T + bh)
//   h' = (1 - z) . h + z . h~
template <typename T>
typename Trace<T>::Id gru_cell(Trace<T>& tr, typename Trace<T>::Id x,
                               typename Trace<T>::Id h,
                               const GruParamIds<T>& p) {
  const auto z = tr.sigmoid_(tr.add_row_vector(
      tr.add(tr.matmul_nt(x, p.w_z), tr.matmul_nt(h, p.u_z)), p.b_z));
  const auto r = tr.sigmoid_(tr.add_row_vector(
      tr.add(tr.matmul_nt(x, p.w_r), tr.matmul_nt(h, p.u_r)), p.b_r));
  const auto rh = tr.mul(r, h);
  const auto h_tilde = tr.tanh_(tr.add_row_vector(
      tr.add(tr.matmul_nt(x, p.w_h), tr.matmul_nt(rh, p.u_h)), p.b_h));
  const auto zh = tr.mul(z, h);
  const auto zt = tr.mul(z, h_tilde);
  return tr.add(tr.sub(h, zh), zt);
}

}  // namespace paccmann::tensor
