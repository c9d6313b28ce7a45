//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "paccmann/common/rng.hpp"
#include "paccmann/tensor/tensor.hpp"

namespace paccmann::tensor {

// Running statistics for one batch-norm layer; owned by the model so they
// persist across traced steps.
template <typename T>
struct BnState {
  Tensor<T> running_mean;
  Tensor<T> running_var;
  T momentum = T(0.99);
  T eps = T(1e-5);

  static BnState make(int features) {
    BnState s;
    s.running_mean = Tensor<T>(1, features, T(0));
    s.running_var = Tensor<T>(1, features, T(1));
    return s;
  }
};

// Eager reverse-mode tape. Each op computes its value immediately and
// records a closure that routes output gradients to its inputs; backward()
// replays the closures in reverse creation order, which is a reverse
// topological order by construction. Gradients accumulate additively.
template <typename T>
class Trace {
 public:
  using Id = int;
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<Mat>;
  using CMap = Eigen::Map<const Mat>;

  Id input(Tensor<T> t) {
    const bool needs_grad = t.requires_grad;
    return push(std::move(t), needs_grad, nullptr);
  }

  const Tensor<T>& value(Id id) const { return nodes_[id].value; }
  const Tensor<T>& grad(Id id) const {
    if (nodes_[id].grad.size() == 0) {
      throw common::Error("gradient not computed for node");
    }
    return nodes_[id].grad;
  }
  size_t node_count() const { return nodes_.size(); }

  Id matmul(Id a, Id b) {
    const auto& ta = val(a);
    const auto& tb = val(b);
    if (ta.cols != tb.rows) {
      throw ShapeMismatch("matmul: " + dims(ta) + " x " + dims(tb));
    }
    Tensor<T> out(ta.rows, tb.cols);
    map(out) = cmap(ta) * cmap(tb);
    return push(std::move(out), needs(a) || needs(b), [this, a, b](Id o) {
      if (needs(a)) gmap(a) += cmap(nodes_[o].grad) * cmap(val(b)).transpose();
      if (needs(b)) gmap(b) += cmap(val(a)).transpose() * cmap(nodes_[o].grad);
    });
  }

  // a * b^T without materializing the transpose; the natural layout for
  // dense layers whose weights are stored [fan_out x fan_in].
  Id matmul_nt(Id a, Id b) {
    const auto& ta = val(a);
    const auto& tb = val(b);
    if (ta.cols != tb.cols) {
      throw ShapeMismatch("matmul_nt: " + dims(ta) + " x " + dims(tb) + "^T");
    }
    Tensor<T> out(ta.rows, tb.rows);
    map(out) = cmap(ta) * cmap(tb).transpose();
    return push(std::move(out), needs(a) || needs(b), [this, a, b](Id o) {
      if (needs(a)) gmap(a) += cmap(nodes_[o].grad) * cmap(val(b));
      if (needs(b)) gmap(b) += cmap(nodes_[o].grad).transpose() * cmap(val(a));
    });
  }

  Id add(Id a, Id b) {
    check_same(a, b, "add");
    Tensor<T> out = val(a);
    map(out) += cmap(val(b));
    return push(std::move(out), needs(a) || needs(b), [this, a, b](Id o) {
      if (needs(a)) gmap(a) += cmap(nodes_[o].grad);
      if (needs(b)) gmap(b) += cmap(nodes_[o].grad);
    });
  }

  Id sub(Id a, Id b) {
    check_same(a, b, "sub");
    Tensor<T> out = val(a);
    map(out) -= cmap(val(b));
    return push(std::move(out), needs(a) || needs(b), [this, a, b](Id o) {
      if (needs(a)) gmap(a) += cmap(nodes_[o].grad);
      if (needs(b)) gmap(b) -= cmap(nodes_[o].grad);
    });
  }

  Id mul(Id a, Id b) {
    check_same(a, b, "mul");
    Tensor<T> out = val(a);
    map(out) = cmap(val(a)).cwiseProduct(cmap(val(b)));
    return push(std::move(out), needs(a) || needs(b), [this, a, b](Id o) {
      if (needs(a)) {
        gmap(a) += cmap(nodes_[o].grad).cwiseProduct(cmap(val(b)));
      }
      if (needs(b)) {
        gmap(b) += cmap(nodes_[o].grad).cwiseProduct(cmap(val(a)));
      }
    });
  }

  Id add_row_vector(Id a, Id v) {
    const auto& ta = val(a);
    const auto& tv = val(v);
    if (tv.rows != 1 || tv.cols != ta.cols) {
      throw ShapeMismatch("add_row_vector: " + dims(ta) + " + " + dims(tv));
    }
    Tensor<T> out = ta;
    map(out).rowwise() += cmap(tv).row(0);
    return push(std::move(out), needs(a) || needs(v), [this, a, v](Id o) {
      if (needs(a)) gmap(a) += cmap(nodes_[o].grad);
      if (needs(v)) gmap(v) += cmap(nodes_[o].grad).colwise().sum();
    });
  }

  // [B x C] -> [B*times x C]; row b*times+t copies row b.
  Id repeat_rows(Id a, int times) {
    const auto& ta = val(a);
    if (times < 1) throw ShapeMismatch("repeat_rows: times must be positive");
    Tensor<T> out(ta.rows * times, ta.cols);
    for (int b = 0; b < ta.rows; ++b) {
      for (int t = 0; t < times; ++t) {
        map(out).row(b * times + t) = cmap(ta).row(b);
      }
    }
    return push(std::move(out), needs(a), [this, a, times](Id o) {
      if (!needs(a)) return;
      const auto& g = nodes_[o].grad;
      for (int b = 0; b < val(a).rows; ++b) {
        for (int t = 0; t < times; ++t) {
          gmap(a).row(b) += cmap(g).row(b * times + t);
        }
      }
    });
  }

  Id scale(Id a, T c) {
    Tensor<T> out = val(a);
    map(out) *= c;
    return push(std::move(out), needs(a), [this, a, c](Id o) {
      if (needs(a)) gmap(a) += c * cmap(nodes_[o].grad);
    });
  }

  Id tanh_(Id a) {
    Tensor<T> out = val(a);
    for (T& v : out.data) v = std::tanh(v);
    return push(std::move(out), needs(a), [this, a](Id o) {
      if (!needs(a)) return;
      const auto& y = nodes_[o].value;
      gmap(a).array() +=
          cmap(nodes_[o].grad).array() * (T(1) - cmap(y).array().square());
    });
  }

  Id sigmoid_(Id a) {
    Tensor<T> out = val(a);
    for (T& v : out.data) v = stable_sigmoid(v);
    return push(std::move(out), needs(a), [this, a](Id o) {
      if (!needs(a)) return;
      const auto& y = nodes_[o].value;
      gmap(a).array() += cmap(nodes_[o].grad).array() * cmap(y).array() *
                         (T(1) - cmap(y).array());
    });
  }

  // Row-wise softmax with no mask (gene attention).
  Id softmax_rows(Id a) {
    const auto& ta = val(a);
    Tensor<T> out(ta.rows, ta.cols);
    for (int r = 0; r < ta.rows; ++r) {
      const T mx = cmap(ta).row(r).maxCoeff();
      T sum = T(0);
      for (int c = 0; c < ta.cols; ++c) {
        out.at(r, c) = std::exp(ta.at(r, c) - mx);
        sum += out.at(r, c);
      }
      for (int c = 0; c < ta.cols; ++c) out.at(r, c) /= sum;
    }
    return push(std::move(out), needs(a), [this, a](Id o) {
      if (!needs(a)) return;
      const auto& y = nodes_[o].value;
      const auto& g = nodes_[o].grad;
      for (int r = 0; r < y.rows; ++r) {
        const T dot = cmap(g).row(r).dot(cmap(y).row(r));
        gmap(a).row(r).array() +=
            cmap(y).row(r).array() * (cmap(g).row(r).array() - dot);
      }
    });
  }

  // Column vector of logits grouped into blocks of block_len rows; softmax
  // within each block over positions whose mask byte is nonzero. Masked
  // positions get exactly zero.
  Id softmax_masked(Id a, const std::vector<uint8_t>& mask, int block_len) {
    const auto& ta = val(a);
    if (ta.cols != 1 || mask.size() != static_cast<size_t>(ta.rows) ||
        block_len < 1 || ta.rows % block_len != 0) {
      throw ShapeMismatch("softmax_masked: bad logits/mask layout");
    }
    Tensor<T> out(ta.rows, 1, T(0));
    for (int start = 0; start < ta.rows; start += block_len) {
      T mx = -std::numeric_limits<T>::infinity();
      for (int i = start; i < start + block_len; ++i) {
        if (mask[i]) mx = std::max(mx, ta.data[i]);
      }
      if (!std::isfinite(static_cast<double>(mx))) {
        throw AllMasked("softmax_masked: all positions masked in a block");
      }
      T sum = T(0);
      for (int i = start; i < start + block_len; ++i) {
        if (mask[i]) {
          out.data[i] = std::exp(ta.data[i] - mx);
          sum += out.data[i];
        }
      }
      for (int i = start; i < start + block_len; ++i) out.data[i] /= sum;
    }
    return push(std::move(out), needs(a),
                [this, a, mask, block_len](Id o) {
                  if (!needs(a)) return;
                  const auto& y = nodes_[o].value;
                  const auto& g = nodes_[o].grad;
                  for (int start = 0; start < y.rows; start += block_len) {
                    T dot = T(0);
                    for (int i = start; i < start + block_len; ++i) {
                      dot += g.data[i] * y.data[i];
                    }
                    for (int i = start; i < start + block_len; ++i) {
                      if (mask[i]) {
                        nodes_[a].grad.data[i] +=
                            y.data[i] * (g.data[i] - dot);
                      }
                    }
                  }
                });
  }

  // Output row i = src row rows[i]. Gradient scatters back except into
  // skip_grad_row (used to freeze the PAD embedding row).
  Id gather_rows(Id src, std::vector<int> rows, int skip_grad_row = -1) {
    const auto& ts = val(src);
    Tensor<T> out(static_cast<int>(rows.size()), ts.cols);
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] < 0 || rows[i] >= ts.rows) {
        throw IndexOutOfRange("gather_rows: index " + std::to_string(rows[i]) +
                              " outside 0.." + std::to_string(ts.rows - 1));
      }
      map(out).row(static_cast<int>(i)) = cmap(ts).row(rows[i]);
    }
    return push(std::move(out), needs(src),
                [this, src, rows = std::move(rows), skip_grad_row](Id o) {
                  if (!needs(src)) return;
                  const auto& g = nodes_[o].grad;
                  for (size_t i = 0; i < rows.size(); ++i) {
                    if (rows[i] == skip_grad_row) continue;
                    gmap(src).row(rows[i]) +=
                        cmap(g).row(static_cast<int>(i));
                  }
                });
  }

  Id concat_cols(const std::vector<Id>& parts) {
    if (parts.empty()) throw ShapeMismatch("concat_cols: no parts");
    const int rows = val(parts[0]).rows;
    int cols = 0;
    for (Id p : parts) {
      if (val(p).rows != rows) {
        throw ShapeMismatch("concat_cols: row counts differ");
      }
      cols += val(p).cols;
    }
    Tensor<T> out(rows, cols);
    int off = 0;
    bool any = false;
    for (Id p : parts) {
      map(out).middleCols(off, val(p).cols) = cmap(val(p));
      off += val(p).cols;
      any = any || needs(p);
    }
    return push(std::move(out), any, [this, parts](Id o) {
      const auto& g = nodes_[o].grad;
      int off = 0;
      for (Id p : parts) {
        if (needs(p)) gmap(p) += cmap(g).middleCols(off, val(p).cols);
        off += val(p).cols;
      }
    });
  }

  // Unfolds [B*T x C] into [B*T x K*C] windows with zero 'same' padding per
  // block; convolution is then matmul_nt against [filters x K*C] kernels.
  Id im2col_blocks(Id x, int block_len, int k) {
    const auto& tx = val(x);
    if (block_len < 1 || tx.rows % block_len != 0) {
      throw ShapeMismatch("im2col_blocks: rows not divisible by block length");
    }
    if (k < 1 || k % 2 == 0) {
      throw ShapeMismatch("im2col_blocks: kernel length must be odd");
    }
    if (block_len < k) {
      throw SequenceTooShort("im2col_blocks: block length " +
                             std::to_string(block_len) + " < kernel " +
                             std::to_string(k));
    }
    const int c = tx.cols;
    const int half = k / 2;
    Tensor<T> out(tx.rows, k * c, T(0));
    for (int start = 0; start < tx.rows; start += block_len) {
      for (int t = 0; t < block_len; ++t) {
        for (int dk = 0; dk < k; ++dk) {
          const int s = t + dk - half;
          if (s < 0 || s >= block_len) continue;
          map(out).block(start + t, dk * c, 1, c) =
              cmap(tx).block(start + s, 0, 1, c);
        }
      }
    }
    return push(std::move(out), needs(x), [this, x, block_len, k](Id o) {
      if (!needs(x)) return;
      const auto& g = nodes_[o].grad;
      const int c = val(x).cols;
      const int half = k / 2;
      for (int start = 0; start < val(x).rows; start += block_len) {
        for (int t = 0; t < block_len; ++t) {
          for (int dk = 0; dk < k; ++dk) {
            const int s = t + dk - half;
            if (s < 0 || s >= block_len) continue;
            gmap(x).block(start + s, 0, 1, c) +=
                cmap(g).block(start + t, dk * c, 1, c);
          }
        }
      }
    });
  }

  // Global max pool per block: [B*T x C] -> [B x C]; gradient routes to the
  // first maximal position.
  Id max_pool_blocks(Id x, int block_len) {
    const auto& tx = val(x);
    if (block_len < 1 || tx.rows % block_len != 0) {
      throw ShapeMismatch("max_pool_blocks: rows not divisible by block");
    }
    const int blocks = tx.rows / block_len;
    Tensor<T> out(blocks, tx.cols);
    std::vector<int> argmax(static_cast<size_t>(blocks) * tx.cols);
    for (int b = 0; b < blocks; ++b) {
      for (int c = 0; c < tx.cols; ++c) {
        int best = b * block_len;
        for (int t = 1; t < block_len; ++t) {
          if (tx.at(b * block_len + t, c) > tx.at(best, c)) {
            best = b * block_len + t;
          }
        }
        out.at(b, c) = tx.at(best, c);
        argmax[static_cast<size_t>(b) * tx.cols + c] = best;
      }
    }
    return push(std::move(out), needs(x),
                [this, x, argmax = std::move(argmax)](Id o) {
                  if (!needs(x)) return;
                  const auto& g = nodes_[o].grad;
                  for (int b = 0; b < g.rows; ++b) {
                    for (int c = 0; c < g.cols; ++c) {
                      nodes_[x].grad.at(
                          argmax[static_cast<size_t>(b) * g.cols + c], c) +=
                          g.at(b, c);
                    }
                  }
                });
  }

  // Weighted sum per block: alpha [B*T x 1], e [B*T x C] -> [B x C].
  Id attention_pool(Id alpha, Id e, int block_len) {
    const auto& ta = val(alpha);
    const auto& te = val(e);
    if (ta.cols != 1 || ta.rows != te.rows || block_len < 1 ||
        te.rows % block_len != 0) {
      throw ShapeMismatch("attention_pool: bad alpha/e layout");
    }
    const int blocks = te.rows / block_len;
    Tensor<T> out(blocks, te.cols, T(0));
    for (int b = 0; b < blocks; ++b) {
      for (int t = 0; t < block_len; ++t) {
        const int r = b * block_len + t;
        map(out).row(b) += ta.data[r] * cmap(te).row(r);
      }
    }
    return push(std::move(out), needs(alpha) || needs(e),
                [this, alpha, e, block_len](Id o) {
                  const auto& g = nodes_[o].grad;
                  const auto& ta = val(alpha);
                  const auto& te = val(e);
                  for (int b = 0; b < g.rows; ++b) {
                    for (int t = 0; t < block_len; ++t) {
                      const int r = b * block_len + t;
                      if (needs(alpha)) {
                        nodes_[alpha].grad.data[r] +=
                            cmap(g).row(b).dot(cmap(te).row(r));
                      }
                      if (needs(e)) {
                        gmap(e).row(r) += ta.data[r] * cmap(g).row(b);
                      }
                    }
                  }
                });
  }

  // Row i of the output picks row i of a when keep[i] is nonzero, else of b.
  // Used to freeze recurrent states past each sequence's length.
  Id row_mix(Id a, Id b, std::vector<uint8_t> keep) {
    check_same(a, b, "row_mix");
    const auto& ta = val(a);
    if (keep.size() != static_cast<size_t>(ta.rows)) {
      throw ShapeMismatch("row_mix: keep size mismatch");
    }
    Tensor<T> out(ta.rows, ta.cols);
    for (int r = 0; r < ta.rows; ++r) {
      map(out).row(r) = keep[r] ? cmap(ta).row(r) : cmap(val(b)).row(r);
    }
    return push(std::move(out), needs(a) || needs(b),
                [this, a, b, keep = std::move(keep)](Id o) {
                  const auto& g = nodes_[o].grad;
                  for (int r = 0; r < g.rows; ++r) {
                    if (keep[r]) {
                      if (needs(a)) gmap(a).row(r) += cmap(g).row(r);
                    } else {
                      if (needs(b)) gmap(b).row(r) += cmap(g).row(r);
                    }
                  }
                });
  }

  // Batch normalization over rows. Training mode normalizes by batch
  // statistics (biased variance) and, when update_running is set, folds them
  // into the persistent state; inference mode uses the running statistics.
  Id batch_norm(Id x, Id gamma, Id beta, BnState<T>* state, bool training,
                bool update_running = true) {
    const auto& tx = val(x);
    const int f = tx.cols;
    if (val(gamma).cols != f || val(gamma).rows != 1 ||
        val(beta).cols != f || val(beta).rows != 1 ||
        state->running_mean.cols != f) {
      throw ShapeMismatch("batch_norm: parameter shapes do not match input");
    }
    if (training && tx.rows < 2) {
      throw BatchTooSmall("batch_norm: training batch must have >= 2 rows");
    }

    Tensor<T> mean(1, f), var(1, f);
    if (training) {
      map(mean) = cmap(tx).colwise().mean();
      for (int c = 0; c < f; ++c) {
        T acc = T(0);
        for (int r = 0; r < tx.rows; ++r) {
          const T d = tx.at(r, c) - mean.at(0, c);
          acc += d * d;
        }
        var.at(0, c) = acc / static_cast<T>(tx.rows);
      }
      if (update_running) {
        const T m = state->momentum;
        for (int c = 0; c < f; ++c) {
          state->running_mean.at(0, c) =
              m * state->running_mean.at(0, c) + (T(1) - m) * mean.at(0, c);
          state->running_var.at(0, c) =
              m * state->running_var.at(0, c) + (T(1) - m) * var.at(0, c);
        }
      }
    } else {
      mean = state->running_mean;
      var = state->running_var;
    }

    Tensor<T> inv_std(1, f);
    for (int c = 0; c < f; ++c) {
      inv_std.at(0, c) = T(1) / std::sqrt(var.at(0, c) + state->eps);
    }
    Tensor<T> xhat(tx.rows, f);
    for (int r = 0; r < tx.rows; ++r) {
      for (int c = 0; c < f; ++c) {
        xhat.at(r, c) = (tx.at(r, c) - mean.at(0, c)) * inv_std.at(0, c);
      }
    }
    Tensor<T> out(tx.rows, f);
    for (int r = 0; r < tx.rows; ++r) {
      for (int c = 0; c < f; ++c) {
        out.at(r, c) =
            val(gamma).at(0, c) * xhat.at(r, c) + val(beta).at(0, c);
      }
    }
    return push(
        std::move(out), needs(x) || needs(gamma) || needs(beta),
        [this, x, gamma, beta, training, xhat = std::move(xhat),
         inv_std = std::move(inv_std)](Id o) {
          const auto& g = nodes_[o].grad;
          const int rows = g.rows;
          const int f = g.cols;
          if (needs(beta)) gmap(beta) += cmap(g).colwise().sum();
          if (needs(gamma)) {
            for (int c = 0; c < f; ++c) {
              T acc = T(0);
              for (int r = 0; r < rows; ++r) acc += g.at(r, c) * xhat.at(r, c);
              nodes_[gamma].grad.at(0, c) += acc;
            }
          }
          if (!needs(x)) return;
          if (!training) {
            for (int r = 0; r < rows; ++r) {
              for (int c = 0; c < f; ++c) {
                nodes_[x].grad.at(r, c) += g.at(r, c) *
                                           val(gamma).at(0, c) *
                                           inv_std.at(0, c);
              }
            }
            return;
          }
          for (int c = 0; c < f; ++c) {
            T sum_dxhat = T(0);
            T sum_dxhat_xhat = T(0);
            for (int r = 0; r < rows; ++r) {
              const T dxhat = g.at(r, c) * val(gamma).at(0, c);
              sum_dxhat += dxhat;
              sum_dxhat_xhat += dxhat * xhat.at(r, c);
            }
            const T n = static_cast<T>(rows);
            for (int r = 0; r < rows; ++r) {
              const T dxhat = g.at(r, c) * val(gamma).at(0, c);
              nodes_[x].grad.at(r, c) +=
                  inv_std.at(0, c) / n *
                  (n * dxhat - sum_dxhat - xhat.at(r, c) * sum_dxhat_xhat);
            }
          }
        });
  }

  // Inverted dropout: surviving activations scale by 1/(1-p) so inference
  // is the identity.
  Id dropout(Id x, double p, bool training, common::Rng& rng) {
    if (p < 0.0 || p >= 1.0) {
      throw common::Error("dropout: p must be in [0,1)");
    }
    if (!training || p == 0.0) {
      Tensor<T> out = val(x);
      return push(std::move(out), needs(x), [this, x](Id o) {
        if (needs(x)) gmap(x) += cmap(nodes_[o].grad);
      });
    }
    const T keep_scale = T(1.0 / (1.0 - p));
    std::vector<T> mask(val(x).size());
    for (T& m : mask) m = rng.uniform() < p ? T(0) : keep_scale;
    Tensor<T> out = val(x);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= mask[i];
    return push(std::move(out), needs(x),
                [this, x, mask = std::move(mask)](Id o) {
                  if (!needs(x)) return;
                  const auto& g = nodes_[o].grad;
                  for (size_t i = 0; i < g.data.size(); ++i) {
                    nodes_[x].grad.data[i] += g.data[i] * mask[i];
                  }
                });
  }

  // Mean squared error to a constant target; returns a 1x1 scalar node.
  Id mse(Id pred, const Tensor<T>& target) {
    const auto& tp = val(pred);
    if (!tp.same_shape(target)) {
      throw ShapeMismatch("mse: prediction/target shapes differ");
    }
    if (tp.size() == 0) throw ShapeMismatch("mse: empty prediction");
    T acc = T(0);
    for (size_t i = 0; i < tp.data.size(); ++i) {
      const T d = tp.data[i] - target.data[i];
      acc += d * d;
    }
    Tensor<T> out(1, 1, acc / static_cast<T>(tp.size()));
    return push(std::move(out), needs(pred), [this, pred, target](Id o) {
      if (!needs(pred)) return;
      const T scale = nodes_[o].grad.data[0] * T(2) /
                      static_cast<T>(target.size());
      const auto& tp = val(pred);
      for (size_t i = 0; i < tp.data.size(); ++i) {
        nodes_[pred].grad.data[i] +=
            scale * (tp.data[i] - target.data[i]);
      }
    });
  }

  void backward(Id root) {
    if (ran_backward_) throw common::Error("backward already ran");
    ran_backward_ = true;
    if (val(root).rows != 1 || val(root).cols != 1) {
      throw ShapeMismatch("backward: root must be scalar");
    }
    for (auto& n : nodes_) {
      if (n.needs_grad) n.grad = Tensor<T>(n.value.rows, n.value.cols, T(0));
    }
    if (!nodes_[root].needs_grad) return;
    nodes_[root].grad.data[0] = T(1);
    for (Id i = root; i >= 0; --i) {
      if (nodes_[i].backward && nodes_[i].needs_grad) nodes_[i].backward(i);
    }
  }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool needs_grad = false;
    std::function<void(Id)> backward;
  };

  static T stable_sigmoid(T x) {
    if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
    const T e = std::exp(x);
    return e / (T(1) + e);
  }

  const Tensor<T>& val(Id id) const { return nodes_[id].value; }
  bool needs(Id id) const { return nodes_[id].needs_grad; }
  Map map(Tensor<T>& t) { return Map(t.data.data(), t.rows, t.cols); }
  CMap cmap(const Tensor<T>& t) const {
    return CMap(t.data.data(), t.rows, t.cols);
  }
  Map gmap(Id id) {
    auto& g = nodes_[id].grad;
    return Map(g.data.data(), g.rows, g.cols);
  }
  static std::string dims(const Tensor<T>& t) {
    return std::to_string(t.rows) + "x" + std::to_string(t.cols);
  }
  void check_same(Id a, Id b, const char* op) const {
    if (!val(a).same_shape(val(b))) {
      throw ShapeMismatch(std::string(op) + ": shapes " + dims(val(a)) +
                          " vs " + dims(val(b)));
    }
  }

  Id push(Tensor<T> value, bool needs_grad, std::function<void(Id)> backward) {
#ifndef NDEBUG
    if (!value.all_finite()) {
      throw common::Error("non-finite values produced by a forward op");
    }
#endif
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.backward = needs_grad ? std::move(backward) : nullptr;
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size()) - 1;
  }

  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

}  // namespace paccmann::tensor
