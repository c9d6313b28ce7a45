//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "paccmann/dataio/dataio.hpp"
#include "paccmann/encoders/encoders.hpp"
#include "paccmann/model/config.hpp"
#include "paccmann/smiles/token.hpp"
#include "paccmann/tensor/adam.hpp"
#include "paccmann/tensor/trace.hpp"

namespace paccmann::model {

struct LeakageDetected : common::ValidationError {
  using ValidationError::ValidationError;
};

// One assembled minibatch. Sequences are stacked [batch * t_len x ...],
// vectors are [batch x ...]. The fingerprint block is used only by DNN_FP,
// the token block by every other encoder.
template <typename T>
struct Batch {
  int batch = 0;
  int t_len = 0;
  std::vector<int> tokens;
  std::vector<uint8_t> mask;
  tensor::Tensor<T> fingerprints;
  tensor::Tensor<T> genes;
  tensor::Tensor<T> targets;  // [batch x 1]; empty for pure inference
};

template <typename T>
struct Model {
  ModelConfig cfg;
  smiles::TokenDictionary dict;
  netprop::GenePanel panel;
  double ic50_min = 0.0, ic50_max = 1.0;

  encoders::DenseParams<T> gae;
  encoders::EmbeddingTable<T> embedding;
  encoders::AttentionParams<T> attention;  // SA / CA
  encoders::BrnnParams<T> rnn;
  encoders::ScnnParams<T> scnn;
  encoders::McaParams<T> mca;
  std::vector<encoders::DenseParams<T>> head;
  std::vector<tensor::Tensor<T>> bn_gamma, bn_beta;
  std::vector<tensor::BnState<T>> bn_state;
  encoders::DenseParams<T> out_layer;
};

inline int encoder_width(const ModelConfig& cfg) {
  switch (cfg.encoder_kind) {
    case EncoderKind::kDnnFp: return kFingerprintBits;
    case EncoderKind::kBrnn: return 4 * cfg.h;
    case EncoderKind::kScnn: return 16;
    case EncoderKind::kSa: return cfg.h;
    case EncoderKind::kCa: return cfg.h;
    case EncoderKind::kMca: return 2 * cfg.mca_filters + cfg.h;
  }
  throw common::InvalidConfig("unknown encoder kind");
}

template <typename T>
Model<T> build(const ModelConfig& cfg, const smiles::TokenDictionary& dict,
               const netprop::GenePanel& panel) {
  cfg.validate();
  if (static_cast<int>(panel.genes.size()) != cfg.gene_panel_size) {
    throw common::InvalidConfig("gene_panel_size does not match the panel");
  }
  common::Rng rng(cfg.seed);
  Model<T> m;
  m.cfg = cfg;
  m.dict = dict;
  m.panel = panel;
  const int g = cfg.gene_panel_size;
  m.gae = encoders::DenseParams<T>::make(g, g, rng);
  if (cfg.encoder_kind != EncoderKind::kDnnFp) {
    m.embedding = encoders::EmbeddingTable<T>::make(dict.size(), cfg.h, rng);
  }
  switch (cfg.encoder_kind) {
    case EncoderKind::kDnnFp:
      break;
    case EncoderKind::kSa:
      m.attention = encoders::AttentionParams<T>::make_self(cfg.attention_size,
                                                            cfg.h, rng);
      break;
    case EncoderKind::kCa:
      m.attention = encoders::AttentionParams<T>::make_contextual(
          cfg.attention_size, cfg.h, g, rng);
      break;
    case EncoderKind::kBrnn:
      m.rnn = encoders::BrnnParams<T>::make(cfg.h, rng);
      break;
    case EncoderKind::kScnn:
      m.scnn = encoders::ScnnParams<T>::make(cfg.h, rng);
      break;
    case EncoderKind::kMca:
      m.mca = encoders::McaParams<T>::make(
          cfg.h, g, rng, cfg.mca_kernel_a, cfg.mca_kernel_b, cfg.mca_filters,
          cfg.conv_attention_size, cfg.attention_size);
      break;
  }
  int in = encoder_width(cfg) + g;
  for (int width : cfg.dense_layers) {
    m.head.push_back(encoders::DenseParams<T>::make(width, in, rng));
    m.bn_gamma.push_back(tensor::Tensor<T>(1, width, T(1)));
    m.bn_beta.push_back(tensor::Tensor<T>(1, width, T(0)));
    m.bn_state.push_back(tensor::BnState<T>::make(width));
    in = width;
  }
  m.out_layer = encoders::DenseParams<T>::make(1, in, rng);
  return m;
}

// Visits every trainable tensor in a fixed order. Training, checkpointing
// and gradient collection all rely on this single ordering.
template <typename T, typename F>
void for_each_param(Model<T>& m, F&& fn) {
  fn("gae.w", m.gae.w);
  fn("gae.b", m.gae.b);
  const EncoderKind kind = m.cfg.encoder_kind;
  if (kind != EncoderKind::kDnnFp) fn("embedding.table", m.embedding.table);
  auto attention_params = [&](const std::string& prefix,
                              encoders::AttentionParams<T>& p) {
    fn(prefix + ".v", p.v);
    fn(prefix + ".w_e", p.w_e);
    if (p.b.size() > 0) fn(prefix + ".b", p.b);
    if (p.w_g.size() > 0) fn(prefix + ".w_g", p.w_g);
  };
  auto gru_params = [&](const std::string& prefix, tensor::GruParams<T>& p) {
    fn(prefix + ".w_z", p.w_z);
    fn(prefix + ".w_r", p.w_r);
    fn(prefix + ".w_h", p.w_h);
    fn(prefix + ".u_z", p.u_z);
    fn(prefix + ".u_r", p.u_r);
    fn(prefix + ".u_h", p.u_h);
    fn(prefix + ".b_z", p.b_z);
    fn(prefix + ".b_r", p.b_r);
    fn(prefix + ".b_h", p.b_h);
  };
  switch (kind) {
    case EncoderKind::kDnnFp:
      break;
    case EncoderKind::kSa:
    case EncoderKind::kCa:
      attention_params("att", m.attention);
      break;
    case EncoderKind::kBrnn:
      gru_params("rnn.l1f", m.rnn.l1_fwd);
      gru_params("rnn.l1b", m.rnn.l1_bwd);
      gru_params("rnn.l2f", m.rnn.l2_fwd);
      gru_params("rnn.l2b", m.rnn.l2_bwd);
      break;
    case EncoderKind::kScnn:
      for (size_t i = 0; i < m.scnn.layers.size(); ++i) {
        const std::string p = "scnn." + std::to_string(i);
        fn(p + ".w", m.scnn.layers[i].w);
        fn(p + ".b", m.scnn.layers[i].b);
      }
      break;
    case EncoderKind::kMca:
      fn("mca.conv_a.w", m.mca.conv_a.w);
      fn("mca.conv_a.b", m.mca.conv_a.b);
      fn("mca.conv_b.w", m.mca.conv_b.w);
      fn("mca.conv_b.b", m.mca.conv_b.b);
      attention_params("mca.att_a", m.mca.att_a);
      attention_params("mca.att_b", m.mca.att_b);
      attention_params("mca.att_e", m.mca.att_e);
      break;
  }
  for (size_t i = 0; i < m.head.size(); ++i) {
    const std::string p = "head." + std::to_string(i);
    fn(p + ".w", m.head[i].w);
    fn(p + ".b", m.head[i].b);
    fn(p + ".gamma", m.bn_gamma[i]);
    fn(p + ".beta", m.bn_beta[i]);
  }
  fn("out.w", m.out_layer.w);
  fn("out.b", m.out_layer.b);
}

template <typename T>
struct TracedModel {
  std::vector<std::pair<std::string, typename tensor::Trace<T>::Id>> params;
  typename tensor::Trace<T>::Id prediction = -1;  // [batch x 1]
  typename tensor::Trace<T>::Id gene_alpha = -1;  // [batch x |G|]
  std::vector<typename tensor::Trace<T>::Id> token_alphas;
  typename tensor::Trace<T>::Id loss = -1;  // set when targets present
};

// Builds the full forward graph on the given trace. Parameters are
// registered in for_each_param order, so gradients can be read back
// aligned with that walk.
template <typename T>
TracedModel<T> forward_traced(Model<T>& m, tensor::Trace<T>& tr,
                              const Batch<T>& batch, bool training,
                              bool update_running, common::Rng& rng) {
  using Id = typename tensor::Trace<T>::Id;
  const ModelConfig& cfg = m.cfg;
  const bool fp = cfg.encoder_kind == EncoderKind::kDnnFp;
  if (batch.batch < 1) throw tensor::ShapeMismatch("forward: empty batch");
  if (batch.genes.rows != batch.batch ||
      batch.genes.cols != cfg.gene_panel_size) {
    throw tensor::ShapeMismatch("forward: gene context shape mismatch");
  }
  if (fp) {
    if (batch.fingerprints.rows != batch.batch ||
        batch.fingerprints.cols != kFingerprintBits) {
      throw tensor::ShapeMismatch("forward: fingerprint shape mismatch");
    }
  } else {
    if (batch.t_len != cfg.max_smiles_len ||
        batch.tokens.size() !=
            static_cast<size_t>(batch.batch) * cfg.max_smiles_len ||
        batch.mask.size() != batch.tokens.size()) {
      throw tensor::ShapeMismatch("forward: token block shape mismatch");
    }
  }
  if (batch.targets.size() > 0 &&
      (batch.targets.rows != batch.batch || batch.targets.cols != 1)) {
    throw tensor::ShapeMismatch("forward: target shape mismatch");
  }

  TracedModel<T> tm;
  for_each_param(m, [&](const std::string& name, tensor::Tensor<T>& t) {
    tensor::Tensor<T> copy = t;
    copy.requires_grad = training;
    tm.params.emplace_back(name, tr.input(std::move(copy)));
  });
  auto pid = [&](const std::string& name) -> Id {
    for (const auto& [n, id] : tm.params) {
      if (n == name) return id;
    }
    throw common::Error("forward: unknown parameter " + name);
  };

  const Id genes_in = tr.input(batch.genes);
  const Id gene_enc = encoders::gene_attention(tr, genes_in, pid("gae.w"),
                                               pid("gae.b"), &tm.gene_alpha);

  Id comp = -1;
  if (fp) {
    comp = tr.input(batch.fingerprints);
  } else {
    const Id e = tr.gather_rows(pid("embedding.table"), batch.tokens,
                                smiles::TokenDictionary::kPad);
    const int t_len = cfg.max_smiles_len;
    switch (cfg.encoder_kind) {
      case EncoderKind::kSa: {
        encoders::AttentionIds<T> ids;
        ids.v = pid("att.v");
        ids.w_e = pid("att.w_e");
        ids.b = pid("att.b");
        Id alpha = -1;
        comp = encoders::self_attention(tr, e, ids, batch.mask, t_len, &alpha);
        tm.token_alphas = {alpha};
        break;
      }
      case EncoderKind::kCa: {
        encoders::AttentionIds<T> ids;
        ids.v = pid("att.v");
        ids.w_e = pid("att.w_e");
        ids.w_g = pid("att.w_g");
        Id alpha = -1;
        comp = encoders::contextual_attention(tr, e, genes_in, ids, batch.mask,
                                              t_len, &alpha);
        tm.token_alphas = {alpha};
        break;
      }
      case EncoderKind::kBrnn: {
        auto gru_ids = [&](const std::string& p) {
          return tensor::GruParamIds<T>{
              pid(p + ".w_z"), pid(p + ".w_r"), pid(p + ".w_h"),
              pid(p + ".u_z"), pid(p + ".u_r"), pid(p + ".u_h"),
              pid(p + ".b_z"), pid(p + ".b_r"), pid(p + ".b_h")};
        };
        encoders::BrnnIds<T> ids{gru_ids("rnn.l1f"), gru_ids("rnn.l1b"),
                                 gru_ids("rnn.l2f"), gru_ids("rnn.l2b")};
        comp = encoders::brnn(tr, e, batch.mask, t_len, ids);
        break;
      }
      case EncoderKind::kScnn: {
        encoders::ScnnIds<T> ids;
        ids.kernels = m.scnn.kernels;
        for (size_t i = 0; i < m.scnn.layers.size(); ++i) {
          const std::string p = "scnn." + std::to_string(i);
          ids.layers.emplace_back(pid(p + ".w"), pid(p + ".b"));
        }
        comp = encoders::scnn(tr, e, t_len, ids);
        break;
      }
      case EncoderKind::kMca: {
        auto att_ids = [&](const std::string& p) {
          encoders::AttentionIds<T> a;
          a.v = pid(p + ".v");
          a.w_e = pid(p + ".w_e");
          a.w_g = pid(p + ".w_g");
          return a;
        };
        encoders::McaIds<T> ids;
        ids.conv_a_w = pid("mca.conv_a.w");
        ids.conv_a_b = pid("mca.conv_a.b");
        ids.conv_b_w = pid("mca.conv_b.w");
        ids.conv_b_b = pid("mca.conv_b.b");
        ids.att_a = att_ids("mca.att_a");
        ids.att_b = att_ids("mca.att_b");
        ids.att_e = att_ids("mca.att_e");
        ids.kernel_a = cfg.mca_kernel_a;
        ids.kernel_b = cfg.mca_kernel_b;
        std::array<Id, 3> alphas{};
        comp = encoders::mca(tr, e, genes_in, batch.mask, t_len, ids, &alphas);
        tm.token_alphas = {alphas[0], alphas[1], alphas[2]};
        break;
      }
      case EncoderKind::kDnnFp:
        break;
    }
  }

  Id x = tr.concat_cols({comp, gene_enc});
  for (size_t i = 0; i < m.head.size(); ++i) {
    const std::string p = "head." + std::to_string(i);
    x = tr.add_row_vector(tr.matmul_nt(x, pid(p + ".w")), pid(p + ".b"));
    x = tr.batch_norm(x, pid(p + ".gamma"), pid(p + ".beta"), &m.bn_state[i],
                      training, update_running);
    x = tr.sigmoid_(x);
    x = tr.dropout(x, cfg.dropout, training, rng);
  }
  tm.prediction = tr.sigmoid_(
      tr.add_row_vector(tr.matmul_nt(x, pid("out.w")), pid("out.b")));
  if (batch.targets.size() > 0) tm.loss = tr.mse(tm.prediction, batch.targets);
  return tm;
}

template <typename T>
struct ForwardResult {
  std::vector<T> predictions;
  tensor::Tensor<T> gene_alpha;
  std::vector<tensor::Tensor<T>> token_alphas;
};

template <typename T>
ForwardResult<T> forward(Model<T>& m, const Batch<T>& batch,
                         bool training = false) {
  tensor::Trace<T> tr;
  common::Rng root(m.cfg.seed);
  auto drop_rng = root.fork("dropout");
  const auto tm = forward_traced(m, tr, batch, training, training, drop_rng);
  ForwardResult<T> r;
  r.predictions = tr.value(tm.prediction).data;
  r.gene_alpha = tr.value(tm.gene_alpha);
  for (const auto a : tm.token_alphas) r.token_alphas.push_back(tr.value(a));
  return r;
}

// Tokenization results per distinct SMILES variant, shared across steps.
struct TokenCache {
  std::map<std::string, smiles::EncodedSequence> entries;
};

template <typename T>
Batch<T> make_batch(const Model<T>& m, const dataio::PairedDataset& ds,
                    const std::vector<long>& idx, bool with_targets,
                    TokenCache* cache) {
  const ModelConfig& cfg = m.cfg;
  const bool fp = cfg.encoder_kind == EncoderKind::kDnnFp;
  Batch<T> b;
  b.batch = static_cast<int>(idx.size());
  b.t_len = cfg.max_smiles_len;
  b.genes = tensor::Tensor<T>(b.batch, cfg.gene_panel_size);
  if (with_targets) b.targets = tensor::Tensor<T>(b.batch, 1);
  if (fp) {
    b.fingerprints = tensor::Tensor<T>(b.batch, kFingerprintBits, T(0));
  } else {
    b.tokens.assign(static_cast<size_t>(b.batch) * b.t_len, 0);
    b.mask.assign(b.tokens.size(), 0);
  }
  for (int i = 0; i < b.batch; ++i) {
    const auto& ex = ds.examples[idx[i]];
    const auto& ctx = ds.gene_contexts[ex.cell_row];
    if (static_cast<int>(ctx.size()) != cfg.gene_panel_size) {
      throw tensor::ShapeMismatch("make_batch: gene context width mismatch");
    }
    for (int j = 0; j < cfg.gene_panel_size; ++j) {
      b.genes.at(i, j) = static_cast<T>(ctx[j]);
    }
    if (fp) {
      for (int bit = 0; bit < kFingerprintBits; ++bit) {
        if (ex.fp.bits[bit]) b.fingerprints.at(i, bit) = T(1);
      }
    } else {
      const smiles::EncodedSequence* enc = nullptr;
      smiles::EncodedSequence local;
      if (cache) {
        auto it = cache->entries.find(ex.smiles);
        if (it == cache->entries.end()) {
          it = cache->entries
                   .emplace(ex.smiles,
                            smiles::encode_tokens(smiles::tokenize(ex.smiles),
                                                  m.dict, b.t_len))
                   .first;
        }
        enc = &it->second;
      } else {
        local = smiles::encode_tokens(smiles::tokenize(ex.smiles), m.dict,
                                      b.t_len);
        enc = &local;
      }
      for (int t = 0; t < b.t_len; ++t) {
        b.tokens[static_cast<size_t>(i) * b.t_len + t] = enc->indices[t];
        b.mask[static_cast<size_t>(i) * b.t_len + t] = enc->mask[t];
      }
    }
    if (with_targets) b.targets.at(i, 0) = static_cast<T>(ex.ic50_norm);
  }
  return b;
}

template <typename T>
std::vector<double> predict(Model<T>& m, const dataio::PairedDataset& ds,
                            TokenCache* cache = nullptr) {
  TokenCache local;
  if (!cache) cache = &local;
  std::vector<double> out;
  out.reserve(ds.examples.size());
  const long total = static_cast<long>(ds.examples.size());
  common::Rng unused(0);
  for (long start = 0; start < total; start += 512) {
    const long stop = std::min(total, start + 512);
    std::vector<long> idx;
    idx.reserve(stop - start);
    for (long i = start; i < stop; ++i) idx.push_back(i);
    const auto b = make_batch(m, ds, idx, false, cache);
    tensor::Trace<T> tr;
    const auto tm = forward_traced(m, tr, b, false, false, unused);
    for (const T v : tr.value(tm.prediction).data) {
      out.push_back(static_cast<double>(v));
    }
  }
  return out;
}

template <typename T>
double validation_rmse(Model<T>& m, const dataio::PairedDataset& ds,
                       TokenCache* cache) {
  const auto preds = predict(m, ds, cache);
  double se = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - ds.examples[i].ic50_norm;
    se += d * d;
  }
  return std::sqrt(se / static_cast<double>(preds.size()));
}

inline void check_leakage(const dataio::PairedDataset& train_set,
                          const dataio::PairedDataset& val_set) {
  std::set<std::string> drugs, cells;
  for (const auto& ex : train_set.examples) {
    drugs.insert(ex.drug_id);
    cells.insert(ex.cell_id);
  }
  for (const auto& ex : val_set.examples) {
    if (drugs.count(ex.drug_id)) {
      throw LeakageDetected("drug id shared between train and val: " +
                            ex.drug_id);
    }
    if (cells.count(ex.cell_id)) {
      throw LeakageDetected("cell id shared between train and val: " +
                            ex.cell_id);
    }
  }
}

struct TrainLogRow {
  long step = 0;
  double train_mse = 0.0;
  double val_rmse = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  double best_val_rmse = std::numeric_limits<double>::infinity();
  long best_step = 0;
};

// Minibatch Adam training with best-validation checkpointing. Stops early
// after `patience` evaluation rounds without improvement or once the best
// validation RMSE reaches target_val_rmse.
template <typename T>
TrainResult train(Model<T>& m, const dataio::PairedDataset& train_pairs,
                  const dataio::PairedDataset& val_pairs,
                  const TrainConfig& tcfg) {
  tcfg.validate();
  check_leakage(train_pairs, val_pairs);
  if (train_pairs.examples.empty()) {
    throw common::ValidationError("train: no training examples");
  }
  if (val_pairs.examples.empty()) {
    throw common::ValidationError("train: no validation examples");
  }

  TrainResult res;
  if (tcfg.max_steps == 0) return res;

  TokenCache cache;
  common::Rng root(m.cfg.seed);
  auto batch_rng = root.fork("batch");
  auto drop_rng = root.fork("dropout");

  std::vector<tensor::Tensor<T>*> params;
  for_each_param(m, [&](const std::string&, tensor::Tensor<T>& t) {
    params.push_back(&t);
  });
  std::vector<tensor::AdamState<T>> opt;
  opt.reserve(params.size());
  for (const auto* p : params) opt.push_back(tensor::AdamState<T>::make(*p));

  double last_val = validation_rmse(m, val_pairs, &cache);
  res.best_val_rmse = last_val;
  res.best_step = 0;
  Model<T> best = m;
  int since_best = 0;

  for (long step = 1; step <= tcfg.max_steps; ++step) {
    std::vector<long> idx(tcfg.batch_size);
    for (auto& i : idx) {
      i = static_cast<long>(batch_rng.uniform_index(
          train_pairs.examples.size()));
    }
    const auto batch = make_batch(m, train_pairs, idx, true, &cache);
    tensor::Trace<T> tr;
    const auto tm = forward_traced(m, tr, batch, true, true, drop_rng);
    tr.backward(tm.loss);
    const double lr = tcfg.schedule.lr(step - 1);
    for (size_t p = 0; p < params.size(); ++p) {
      tensor::adam_step(*params[p], tr.grad(tm.params[p].second), opt[p],
                        static_cast<T>(lr));
    }

    bool stop = false;
    if (step % tcfg.eval_every == 0 || step == tcfg.max_steps) {
      last_val = validation_rmse(m, val_pairs, &cache);
      if (last_val < res.best_val_rmse) {
        res.best_val_rmse = last_val;
        res.best_step = step;
        best = m;
        since_best = 0;
      } else if (++since_best >= tcfg.patience) {
        stop = true;
      }
      if (tcfg.target_val_rmse >= 0.0 &&
          res.best_val_rmse <= tcfg.target_val_rmse) {
        stop = true;
      }
    }
    res.log.push_back({step, static_cast<double>(tr.value(tm.loss).data[0]),
                       last_val, lr});
    if (stop) break;
  }
  m = best;
  return res;
}

struct AttentionExport {
  std::vector<std::pair<std::string, double>> gene_weights;  // panel order
  std::vector<std::tuple<int, std::string, double>> token_weights;
  bool has_token_attention = false;
};

// Single-pair inference that surfaces the attention distributions. Token
// weights average the encoder's attention heads over the real (unpadded)
// positions; encoders without token attention leave them empty.
template <typename T>
AttentionExport attention_export(Model<T>& m, const std::string& smiles_str,
                                 const std::vector<double>& gene_context) {
  const ModelConfig& cfg = m.cfg;
  if (static_cast<int>(gene_context.size()) != cfg.gene_panel_size) {
    throw tensor::ShapeMismatch("attention: gene context width mismatch");
  }
  Batch<T> b;
  b.batch = 1;
  b.t_len = cfg.max_smiles_len;
  b.genes = tensor::Tensor<T>(1, cfg.gene_panel_size);
  for (int j = 0; j < cfg.gene_panel_size; ++j) {
    b.genes.at(0, j) = static_cast<T>(gene_context[j]);
  }
  std::vector<smiles::Token> toks;
  if (cfg.encoder_kind == EncoderKind::kDnnFp) {
    const auto fp = smiles::morgan_fingerprint(smiles::parse(smiles_str));
    b.fingerprints = tensor::Tensor<T>(1, kFingerprintBits, T(0));
    for (int bit = 0; bit < kFingerprintBits; ++bit) {
      if (fp.bits[bit]) b.fingerprints.at(0, bit) = T(1);
    }
  } else {
    toks = smiles::tokenize(smiles_str);
    const auto enc = smiles::encode_tokens(toks, m.dict, cfg.max_smiles_len);
    b.tokens = enc.indices;
    b.mask = enc.mask;
  }
  tensor::Trace<T> tr;
  common::Rng unused(0);
  const auto tm = forward_traced(m, tr, b, false, false, unused);
  AttentionExport out;
  const auto& ga = tr.value(tm.gene_alpha);
  for (int j = 0; j < cfg.gene_panel_size; ++j) {
    out.gene_weights.emplace_back(m.panel.genes[j],
                                  static_cast<double>(ga.at(0, j)));
  }
  out.has_token_attention = !tm.token_alphas.empty();
  if (out.has_token_attention) {
    std::vector<double> w(cfg.max_smiles_len, 0.0);
    for (const auto a : tm.token_alphas) {
      const auto& av = tr.value(a);
      for (int t = 0; t < cfg.max_smiles_len; ++t) {
        w[t] += static_cast<double>(av.at(t, 0)) / tm.token_alphas.size();
      }
    }
    for (size_t t = 0; t < toks.size(); ++t) {
      out.token_weights.emplace_back(static_cast<int>(t), toks[t], w[t]);
    }
  }
  return out;
}

}  // namespace paccmann::model
