//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "paccmann/common/rng.hpp"
#include "paccmann/tensor/gru.hpp"
#include "paccmann/tensor/trace.hpp"

namespace paccmann::encoders {

struct MissingContextParams : common::Error {
  using Error::Error;
};

template <typename T>
tensor::Tensor<T> glorot_uniform(int rows, int cols, common::Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  tensor::Tensor<T> t(rows, cols);
  for (T& v : t.data) v = static_cast<T>(rng.uniform(-limit, limit));
  return t;
}

// Token embedding matrix [vocab x H]; the PAD row starts at zero and stays
// zero because gradients are never scattered into it.
template <typename T>
struct EmbeddingTable {
  tensor::Tensor<T> table;

  static EmbeddingTable make(int vocab, int h, common::Rng& rng) {
    EmbeddingTable e;
    e.table = glorot_uniform<T>(vocab, h, rng);
    for (int c = 0; c < h; ++c) e.table.at(0, c) = T(0);
    return e;
  }
};

template <typename T>
struct DenseParams {
  tensor::Tensor<T> w;  // [out x in]
  tensor::Tensor<T> b;  // [1 x out]

  static DenseParams make(int out, int in, common::Rng& rng) {
    return DenseParams{glorot_uniform<T>(out, in, rng),
                       tensor::Tensor<T>(1, out, T(0))};
  }
};

// Attention over token embeddings. Self-attention scores each position by
// V^T tanh(W_e e_i + b); the contextual variant replaces the bias with a
// projection of the gene context, V^T tanh(W_e e_i + W_g G), and carries no
// bias at all.
template <typename T>
struct AttentionParams {
  tensor::Tensor<T> v;    // [A x 1]
  tensor::Tensor<T> w_e;  // [A x H]
  tensor::Tensor<T> b;    // [1 x A]; empty for contextual
  tensor::Tensor<T> w_g;  // [A x |G|]; empty for self

  bool contextual() const { return w_g.size() > 0; }

  static AttentionParams make_self(int a, int h, common::Rng& rng) {
    AttentionParams p;
    p.v = glorot_uniform<T>(a, 1, rng);
    p.w_e = glorot_uniform<T>(a, h, rng);
    p.b = tensor::Tensor<T>(1, a, T(0));
    return p;
  }
  static AttentionParams make_contextual(int a, int h, int g,
                                         common::Rng& rng) {
    AttentionParams p;
    p.v = glorot_uniform<T>(a, 1, rng);
    p.w_e = glorot_uniform<T>(a, h, rng);
    p.w_g = glorot_uniform<T>(a, g, rng);
    return p;
  }
};

template <typename T>
struct AttentionIds {
  typename tensor::Trace<T>::Id v = -1, w_e = -1, b = -1, w_g = -1;
};

template <typename T>
AttentionIds<T> register_attention(tensor::Trace<T>& tr,
                                   const AttentionParams<T>& p) {
  AttentionIds<T> ids;
  ids.v = tr.input(p.v);
  ids.w_e = tr.input(p.w_e);
  if (p.b.size() > 0) ids.b = tr.input(p.b);
  if (p.w_g.size() > 0) ids.w_g = tr.input(p.w_g);
  return ids;
}

// Shared scoring/pooling: u = tanh(e W_e^T + extra) V, alpha =
// softmax_masked(u), encoding = sum_t alpha_t e_t. extra is any [B*T x A]
// additive term, which is what makes the self/contextual variants differ by
// exactly one input.
template <typename T>
typename tensor::Trace<T>::Id attention_core(
    tensor::Trace<T>& tr, typename tensor::Trace<T>::Id e,
    typename tensor::Trace<T>::Id extra, typename tensor::Trace<T>::Id v,
    typename tensor::Trace<T>::Id w_e, const std::vector<uint8_t>& mask,
    int t_len, typename tensor::Trace<T>::Id* alpha_out) {
  const auto scores = tr.add(tr.matmul_nt(e, w_e), extra);
  const auto u = tr.matmul(tr.tanh_(scores), v);
  const auto alpha = tr.softmax_masked(u, mask, t_len);
  if (alpha_out) *alpha_out = alpha;
  return tr.attention_pool(alpha, e, t_len);
}

template <typename T>
typename tensor::Trace<T>::Id self_attention(
    tensor::Trace<T>& tr, typename tensor::Trace<T>::Id e,
    const AttentionIds<T>& ids, const std::vector<uint8_t>& mask, int t_len,
    typename tensor::Trace<T>::Id* alpha_out = nullptr) {
  if (ids.b < 0) throw tensor::ShapeMismatch("self attention needs a bias");
  const auto extra = tr.repeat_rows(ids.b, tr.value(e).rows);
  return attention_core(tr, e, extra, ids.v, ids.w_e, mask, t_len, alpha_out);
}

// g is the batched gene context [B x |G|].
template <typename T>
typename tensor::Trace<T>::Id contextual_attention(
    tensor::Trace<T>& tr, typename tensor::Trace<T>::Id e,
    typename tensor::Trace<T>::Id g, const AttentionIds<T>& ids,
    const std::vector<uint8_t>& mask, int t_len,
    typename tensor::Trace<T>::Id* alpha_out = nullptr) {
  if (ids.w_g < 0) {
    throw MissingContextParams("contextual attention needs W_g");
  }
  const auto extra = tr.repeat_rows(tr.matmul_nt(g, ids.w_g), t_len);
  return attention_core(tr, e, extra, ids.v, ids.w_e, mask, t_len, alpha_out);
}

// Gene attention: softmax over a dense re-scoring of the gene context gates
// the context elementwise.
template <typename T>
typename tensor::Trace<T>::Id gene_attention(
    tensor::Trace<T>& tr, typename tensor::Trace<T>::Id g,
    typename tensor::Trace<T>::Id w, typename tensor::Trace<T>::Id b,
    typename tensor::Trace<T>::Id* alpha_out = nullptr) {
  const auto logits = tr.add_row_vector(tr.matmul_nt(g, w), b);
  const auto alpha = tr.softmax_rows(logits);
  if (alpha_out) *alpha_out = alpha;
  return tr.mul(alpha, g);
}

template <typename T>
struct BrnnParams {
  tensor::GruParams<T> l1_fwd, l1_bwd;  // input width H
  tensor::GruParams<T> l2_fwd, l2_bwd;  // input width 2H

  static BrnnParams make(int h, common::Rng& rng) {
    BrnnParams p;
    auto init = [&](tensor::GruParams<T>& g, int h_in) {
      g = tensor::GruParams<T>::make(h, h_in);
      for (auto* m : {&g.w_z, &g.w_r, &g.w_h}) {
        *m = glorot_uniform<T>(h, h_in, rng);
      }
      for (auto* m : {&g.u_z, &g.u_r, &g.u_h}) {
        *m = glorot_uniform<T>(h, h, rng);
      }
    };
    init(p.l1_fwd, h);
    init(p.l1_bwd, h);
    init(p.l2_fwd, 2 * h);
    init(p.l2_bwd, 2 * h);
    return p;
  }
};

template <typename T>
struct BrnnIds {
  tensor::GruParamIds<T> l1f, l1b, l2f, l2b;
};

template <typename T>
BrnnIds<T> register_brnn(tensor::Trace<T>& tr, const BrnnParams<T>& p) {
  return BrnnIds<T>{tensor::register_gru(tr, p.l1_fwd),
                    tensor::register_gru(tr, p.l1_bwd),
                    tensor::register_gru(tr, p.l2_fwd),
                    tensor::register_gru(tr, p.l2_bwd)};
}

namespace detail {

// Runs one GRU direction over per-step inputs, freezing each sequence's
// state at masked steps. Returns per-step states and writes the final state.
template <typename T>
std::vector<typename tensor::Trace<T>::Id> run_gru_direction(
    tensor::Trace<T>& tr,
    const std::vector<typename tensor::Trace<T>::Id>& x_steps,
    const std::vector<uint8_t>& mask, int t_len, int batch, bool reverse,
    const tensor::GruParamIds<T>& params, int h,
    typename tensor::Trace<T>::Id* final_state) {
  std::vector<typename tensor::Trace<T>::Id> out(t_len);
  auto state = tr.input(tensor::Tensor<T>(batch, h, T(0)));
  for (int i = 0; i < t_len; ++i) {
    const int t = reverse ? t_len - 1 - i : i;
    std::vector<uint8_t> keep(batch);
    for (int b = 0; b < batch; ++b) keep[b] = mask[b * t_len + t];
    const auto next = tensor::gru_cell(tr, x_steps[t], state, params);
    state = tr.row_mix(next, state, std::move(keep));
    out[t] = state;
  }
  *final_state = state;
  return out;
}

}  // namespace detail

// Two stacked bidirectional GRU layers over the stacked embeddings
// [B*T x H]; output [B x 4H] concatenates the final states
// [l2 fwd, l2 bwd, l1 fwd, l1 bwd].
template <typename T>
typename tensor::Trace<T>::Id brnn(tensor::Trace<T>& tr,
                                   typename tensor::Trace<T>::Id e,
                                   const std::vector<uint8_t>& mask, int t_len,
                                   const BrnnIds<T>& ids) {
  using Id = typename tensor::Trace<T>::Id;
  const int rows = tr.value(e).rows;
  const int h = tr.value(e).cols;
  if (t_len < 1 || rows % t_len != 0) {
    throw tensor::ShapeMismatch("brnn: rows not divisible by sequence length");
  }
  const int batch = rows / t_len;
  for (int b = 0; b < batch; ++b) {
    bool any = false;
    for (int t = 0; t < t_len; ++t) any = any || mask[b * t_len + t];
    if (!any) throw tensor::AllMasked("brnn: fully masked sequence");
  }

  std::vector<Id> x1(t_len);
  for (int t = 0; t < t_len; ++t) {
    std::vector<int> rows_t(batch);
    for (int b = 0; b < batch; ++b) rows_t[b] = b * t_len + t;
    x1[t] = tr.gather_rows(e, std::move(rows_t));
  }

  Id l1f_final = -1, l1b_final = -1, l2f_final = -1, l2b_final = -1;
  const auto out_f = detail::run_gru_direction(tr, x1, mask, t_len, batch,
                                               false, ids.l1f, h, &l1f_final);
  const auto out_b = detail::run_gru_direction(tr, x1, mask, t_len, batch,
                                               true, ids.l1b, h, &l1b_final);
  std::vector<Id> x2(t_len);
  for (int t = 0; t < t_len; ++t) {
    x2[t] = tr.concat_cols({out_f[t], out_b[t]});
  }
  detail::run_gru_direction(tr, x2, mask, t_len, batch, false, ids.l2f, h,
                            &l2f_final);
  detail::run_gru_direction(tr, x2, mask, t_len, batch, true, ids.l2b, h,
                            &l2b_final);
  return tr.concat_cols({l2f_final, l2b_final, l1f_final, l1b_final});
}

template <typename T>
struct ScnnParams {
  std::vector<int> kernels = {5, 5, 5, 3};
  std::vector<int> filters = {32, 32, 16, 16};
  std::vector<DenseParams<T>> layers;  // w: [filters_i x kernels_i * c_in]

  static ScnnParams make(int h, common::Rng& rng,
                         std::vector<int> kernels = {5, 5, 5, 3},
                         std::vector<int> filters = {32, 32, 16, 16}) {
    ScnnParams p;
    p.kernels = std::move(kernels);
    p.filters = std::move(filters);
    int c_in = h;
    for (size_t i = 0; i < p.kernels.size(); ++i) {
      p.layers.push_back(
          DenseParams<T>::make(p.filters[i], p.kernels[i] * c_in, rng));
      c_in = p.filters[i];
    }
    return p;
  }

  int out_width() const { return filters.back(); }
};

template <typename T>
struct ScnnIds {
  std::vector<std::pair<typename tensor::Trace<T>::Id,
                        typename tensor::Trace<T>::Id>>
      layers;
  std::vector<int> kernels;
};

template <typename T>
ScnnIds<T> register_scnn(tensor::Trace<T>& tr, const ScnnParams<T>& p) {
  ScnnIds<T> ids;
  ids.kernels = p.kernels;
  for (const auto& l : p.layers) {
    ids.layers.emplace_back(tr.input(l.w), tr.input(l.b));
  }
  return ids;
}

// Stacked sigmoid convolutions; the first layer's kernel spans the full
// embedding width (its 'same' window over K*H inputs is the 2D [H x K]
// kernel), the rest are 1D over the previous feature maps. Global max pool
// collapses the sequence axis.
template <typename T>
typename tensor::Trace<T>::Id scnn(tensor::Trace<T>& tr,
                                   typename tensor::Trace<T>::Id e, int t_len,
                                   const ScnnIds<T>& ids) {
  auto x = e;
  for (size_t i = 0; i < ids.layers.size(); ++i) {
    const auto col = tr.im2col_blocks(x, t_len, ids.kernels[i]);
    x = tr.sigmoid_(tr.add_row_vector(tr.matmul_nt(col, ids.layers[i].first),
                                      ids.layers[i].second));
  }
  return tr.max_pool_blocks(x, t_len);
}

template <typename T>
struct McaParams {
  int kernel_a = 5;
  int kernel_b = 11;
  int filters = 16;
  DenseParams<T> conv_a, conv_b;
  AttentionParams<T> att_a, att_b;  // contextual, A = 64, over feature maps
  AttentionParams<T> att_e;         // contextual, A = 256, over embeddings

  static McaParams make(int h, int g, common::Rng& rng, int kernel_a = 5,
                        int kernel_b = 11, int filters = 16, int a_conv = 64,
                        int a_emb = 256) {
    McaParams p;
    p.kernel_a = kernel_a;
    p.kernel_b = kernel_b;
    p.filters = filters;
    p.conv_a = DenseParams<T>::make(filters, kernel_a * h, rng);
    p.conv_b = DenseParams<T>::make(filters, kernel_b * h, rng);
    p.att_a = AttentionParams<T>::make_contextual(a_conv, filters, g, rng);
    p.att_b = AttentionParams<T>::make_contextual(a_conv, filters, g, rng);
    p.att_e = AttentionParams<T>::make_contextual(a_emb, h, g, rng);
    return p;
  }

  int out_width(int h) const { return 2 * filters + h; }
};

template <typename T>
struct McaIds {
  typename tensor::Trace<T>::Id conv_a_w, conv_a_b, conv_b_w, conv_b_b;
  AttentionIds<T> att_a, att_b, att_e;
  int kernel_a, kernel_b;
};

template <typename T>
McaIds<T> register_mca(tensor::Trace<T>& tr, const McaParams<T>& p) {
  McaIds<T> ids;
  ids.conv_a_w = tr.input(p.conv_a.w);
  ids.conv_a_b = tr.input(p.conv_a.b);
  ids.conv_b_w = tr.input(p.conv_b.w);
  ids.conv_b_b = tr.input(p.conv_b.b);
  ids.att_a = register_attention(tr, p.att_a);
  ids.att_b = register_attention(tr, p.att_b);
  ids.att_e = register_attention(tr, p.att_e);
  ids.kernel_a = p.kernel_a;
  ids.kernel_b = p.kernel_b;
  return ids;
}

// Multiscale convolutional attention: two convolutional channels plus one
// raw-embedding channel, each pooled by contextual attention, concatenated
// [conv_a | conv_b | embedding].
template <typename T>
typename tensor::Trace<T>::Id mca(
    tensor::Trace<T>& tr, typename tensor::Trace<T>::Id e,
    typename tensor::Trace<T>::Id g, const std::vector<uint8_t>& mask,
    int t_len, const McaIds<T>& ids,
    std::array<typename tensor::Trace<T>::Id, 3>* alphas = nullptr) {
  using Id = typename tensor::Trace<T>::Id;
  Id a0 = -1, a1 = -1, a2 = -1;
  const auto f_a = tr.add_row_vector(
      tr.matmul_nt(tr.im2col_blocks(e, t_len, ids.kernel_a), ids.conv_a_w),
      ids.conv_a_b);
  const auto enc_a =
      contextual_attention(tr, f_a, g, ids.att_a, mask, t_len, &a0);
  const auto f_b = tr.add_row_vector(
      tr.matmul_nt(tr.im2col_blocks(e, t_len, ids.kernel_b), ids.conv_b_w),
      ids.conv_b_b);
  const auto enc_b =
      contextual_attention(tr, f_b, g, ids.att_b, mask, t_len, &a1);
  const auto enc_e =
      contextual_attention(tr, e, g, ids.att_e, mask, t_len, &a2);
  if (alphas) *alphas = {a0, a1, a2};
  return tr.concat_cols({enc_a, enc_b, enc_e});
}

// Single-example views used by tests and the attention exporter.

template <typename T>
struct EncoderOutput {
  std::vector<T> encoding;
  // Each report is a list of (position or gene index, weight).
  std::vector<std::vector<std::pair<int, T>>> reports;
};

namespace detail {

template <typename T>
std::vector<std::pair<int, T>> report_from(const tensor::Tensor<T>& alpha) {
  std::vector<std::pair<int, T>> r;
  r.reserve(alpha.size());
  for (size_t i = 0; i < alpha.data.size(); ++i) {
    r.emplace_back(static_cast<int>(i), alpha.data[i]);
  }
  return r;
}

}  // namespace detail

// Plain (untraced) embedding lookup for one sequence.
template <typename T>
tensor::Tensor<T> embed(const std::vector<int>& indices,
                        const std::vector<uint8_t>& mask,
                        const EmbeddingTable<T>& table) {
  if (indices.size() != mask.size()) {
    throw tensor::ShapeMismatch("embed: indices/mask lengths differ");
  }
  tensor::Tensor<T> out(static_cast<int>(indices.size()), table.table.cols);
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= table.table.rows) {
      throw tensor::IndexOutOfRange("embed: token index " +
                                    std::to_string(indices[i]) +
                                    " outside dictionary");
    }
    for (int c = 0; c < table.table.cols; ++c) {
      out.at(static_cast<int>(i), c) = table.table.at(indices[i], c);
    }
  }
  return out;
}

template <typename T>
EncoderOutput<T> gene_attention_encode(const std::vector<T>& g,
                                       const DenseParams<T>& params) {
  tensor::Trace<T> tr;
  tensor::Tensor<T> gt(1, static_cast<int>(g.size()));
  gt.data = g;
  const auto gid = tr.input(std::move(gt));
  typename tensor::Trace<T>::Id alpha = -1;
  const auto enc = gene_attention(tr, gid, tr.input(params.w),
                                  tr.input(params.b), &alpha);
  return {tr.value(enc).data, {detail::report_from(tr.value(alpha))}};
}

template <typename T>
EncoderOutput<T> self_attention_encode(const tensor::Tensor<T>& e,
                                       const std::vector<uint8_t>& mask,
                                       const AttentionParams<T>& params) {
  tensor::Trace<T> tr;
  const auto eid = tr.input(e);
  const auto ids = register_attention(tr, params);
  typename tensor::Trace<T>::Id alpha = -1;
  const auto enc = self_attention(tr, eid, ids, mask, e.rows, &alpha);
  return {tr.value(enc).data, {detail::report_from(tr.value(alpha))}};
}

template <typename T>
EncoderOutput<T> contextual_attention_encode(
    const tensor::Tensor<T>& e, const std::vector<T>& g,
    const std::vector<uint8_t>& mask, const AttentionParams<T>& params) {
  if (!params.contextual()) {
    throw MissingContextParams("contextual attention needs W_g");
  }
  tensor::Trace<T> tr;
  const auto eid = tr.input(e);
  tensor::Tensor<T> gt(1, static_cast<int>(g.size()));
  gt.data = g;
  const auto gid = tr.input(std::move(gt));
  const auto ids = register_attention(tr, params);
  typename tensor::Trace<T>::Id alpha = -1;
  const auto enc = contextual_attention(tr, eid, gid, ids, mask, e.rows,
                                        &alpha);
  return {tr.value(enc).data, {detail::report_from(tr.value(alpha))}};
}

template <typename T>
EncoderOutput<T> brnn_encode(const tensor::Tensor<T>& e,
                             const std::vector<uint8_t>& mask,
                             const BrnnParams<T>& params) {
  tensor::Trace<T> tr;
  const auto eid = tr.input(e);
  const auto ids = register_brnn(tr, params);
  const auto enc = brnn(tr, eid, mask, e.rows, ids);
  return {tr.value(enc).data, {}};
}

template <typename T>
EncoderOutput<T> scnn_encode(const tensor::Tensor<T>& e,
                             const ScnnParams<T>& params) {
  tensor::Trace<T> tr;
  const auto eid = tr.input(e);
  const auto ids = register_scnn(tr, params);
  const auto enc = scnn(tr, eid, e.rows, ids);
  return {tr.value(enc).data, {}};
}

template <typename T>
EncoderOutput<T> mca_encode(const tensor::Tensor<T>& e,
                            const std::vector<T>& g,
                            const std::vector<uint8_t>& mask,
                            const McaParams<T>& params) {
  tensor::Trace<T> tr;
  const auto eid = tr.input(e);
  tensor::Tensor<T> gt(1, static_cast<int>(g.size()));
  gt.data = g;
  const auto gid = tr.input(std::move(gt));
  const auto ids = register_mca(tr, params);
  std::array<typename tensor::Trace<T>::Id, 3> alphas{};
  const auto enc = mca(tr, eid, gid, mask, e.rows, ids, &alphas);
  EncoderOutput<T> out{tr.value(enc).data, {}};
  for (const auto a : alphas) {
    out.reports.push_back(detail::report_from(tr.value(a)));
  }
  return out;
}

}  // namespace paccmann::encoders
