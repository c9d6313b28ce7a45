//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>
#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "paccmann/model/checkpoint.hpp"
#include "paccmann/model/metrics.hpp"
#include "paccmann/model/model.hpp"

using namespace paccmann;
using namespace paccmann::model;
namespace fs = std::filesystem;

namespace {

// Tiny two-drug, three-cell fixture shared by the training tests.
struct Fixture {
  std::vector<dataio::DrugRecord> drugs;
  std::vector<dataio::ExpressionProfile> cells;
  std::vector<dataio::SensitivityRecord> sens;
  netprop::GenePanel panel{{"g1", "g2"}};
  smiles::TokenDictionary dict;

  Fixture() {
    drugs = {{"d1", "CCO", {}},   {"d2", "CCN", {}},  {"d3", "CCCO", {}},
             {"d4", "CC(C)O", {}}, {"d5", "CCCN", {}}, {"d6", "NCCO", {}}};
    for (int c = 0; c < 6; ++c) {
      const double v = 0.2 * c;
      cells.push_back({"c" + std::to_string(c),
                       {{"g1", v}, {"g2", 1.0 - v}}});
    }
    for (const auto& d : drugs) {
      for (const auto& c : cells) {
        const double t =
            0.15 + 0.1 * (d.drug_id.back() - '0') +
            0.05 * c.values.at("g1");
        sens.push_back({d.drug_id, c.cell_id, t, t});
      }
    }
    dict = smiles::build_dictionary({"CCO", "CCN", "CCCO", "CC(C)O", "NCCO"});
  }

  dataio::SubsetSpec subset(std::initializer_list<std::string> ds,
                            std::initializer_list<std::string> cs) const {
    dataio::SubsetSpec s;
    s.drugs.insert(ds.begin(), ds.end());
    s.cells.insert(cs.begin(), cs.end());
    return s;
  }

  dataio::PairedDataset pairs(const dataio::SubsetSpec& s,
                              int augment_n = 1) const {
    return dataio::build_pairs(sens, drugs, cells, panel, s, augment_n, 3);
  }

  ModelConfig config(EncoderKind kind) const {
    ModelConfig cfg;
    cfg.encoder_kind = kind;
    cfg.dense_layers = {16, 8};
    cfg.dropout = 0.25;
    cfg.h = 4;
    cfg.attention_size = 6;
    cfg.conv_attention_size = 5;
    cfg.mca_kernel_a = 3;
    cfg.mca_kernel_b = 5;
    cfg.mca_filters = 3;
    cfg.max_smiles_len = 8;
    cfg.gene_panel_size = 2;
    cfg.seed = 11;
    return cfg;
  }
};

}  // namespace

TEST_CASE("build wires the dense head to the encoder width") {
  Fixture fx;
  auto cfg = fx.config(EncoderKind::kDnnFp);
  auto m = build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel});
  CHECK(m.head[0].w.cols == 512 + 2);

  cfg = fx.config(EncoderKind::kSa);
  auto sa = build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel});
  CHECK(sa.head[0].w.cols == 4 + 2);

  cfg = fx.config(EncoderKind::kBrnn);
  CHECK(build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel})
            .head[0].w.cols == 4 * 4 + 2);

  cfg = fx.config(EncoderKind::kMca);
  CHECK(build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel})
            .head[0].w.cols == 2 * 3 + 4 + 2);

  // Same seed, identical parameters.
  cfg = fx.config(EncoderKind::kSa);
  auto twin = build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel});
  std::vector<float> flat_a, flat_b;
  for_each_param(sa, [&](const std::string&, tensor::Tensor<float>& t) {
    flat_a.insert(flat_a.end(), t.data.begin(), t.data.end());
  });
  for_each_param(twin, [&](const std::string&, tensor::Tensor<float>& t) {
    flat_b.insert(flat_b.end(), t.data.begin(), t.data.end());
  });
  REQUIRE(!flat_a.empty());
  CHECK(flat_a == flat_b);

  cfg.dense_layers = {8, 16};  // not strictly decreasing
  CHECK_THROWS_AS(build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel}),
                  common::InvalidConfig);

  cfg = fx.config(EncoderKind::kMca);
  CHECK(cfg.min_smiles_len() == 5);
  cfg.max_smiles_len = 3;  // shorter than mca_kernel_b
  CHECK_THROWS_AS(build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel}),
                  common::InvalidConfig);
  cfg = fx.config(EncoderKind::kScnn);
  CHECK(cfg.min_smiles_len() == 5);
  cfg.max_smiles_len = 4;
  CHECK_THROWS_AS(build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel}),
                  common::InvalidConfig);
  cfg = fx.config(EncoderKind::kSa);
  CHECK(cfg.min_smiles_len() == 1);
}

TEST_CASE("forward stays in the open unit interval and is repeatable") {
  Fixture fx;
  for (auto kind : {EncoderKind::kDnnFp, EncoderKind::kBrnn, EncoderKind::kScnn,
                    EncoderKind::kSa, EncoderKind::kCa, EncoderKind::kMca}) {
    auto cfg = fx.config(kind);
    auto m = build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel});
    const auto ds = fx.pairs(fx.subset({"d1", "d2"}, {"c0", "c1", "c2"}));
    REQUIRE(ds.examples.size() == 6);
    std::vector<long> idx{0, 1, 2, 3, 4, 5};
    const auto batch = make_batch(m, ds, idx, true, nullptr);

    const auto r1 = forward(m, batch, false);
    const auto r2 = forward(m, batch, false);
    CHECK(r1.predictions == r2.predictions);
    for (float p : r1.predictions) {
      CHECK(p > 0.0f);
      CHECK(p < 1.0f);
    }
    CHECK(r1.gene_alpha.rows == 6);
    const bool attn = kind == EncoderKind::kSa || kind == EncoderKind::kCa;
    CHECK(r1.token_alphas.size() ==
          (attn ? 1u : kind == EncoderKind::kMca ? 3u : 0u));
  }
}

TEST_CASE("single-item inference matches the batched pass") {
  Fixture fx;
  auto cfg = fx.config(EncoderKind::kCa);
  auto m = build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel});
  const auto ds = fx.pairs(fx.subset({"d1", "d2", "d3"}, {"c0", "c1"}));
  std::vector<long> all(ds.examples.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<long>(i);
  const auto batched = forward(m, make_batch(m, ds, all, false, nullptr));
  for (size_t i = 0; i < all.size(); ++i) {
    const auto single = forward(m, make_batch(m, ds, {all[i]}, false, nullptr));
    CHECK(std::abs(single.predictions[0] - batched.predictions[i]) < 1e-6);
  }
}

TEST_CASE("train rejects leakage and honors a zero-step budget") {
  Fixture fx;
  auto cfg = fx.config(EncoderKind::kDnnFp);
  auto m = build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel});

  const auto train_ds = fx.pairs(fx.subset({"d1", "d2"}, {"c0", "c1"}));
  const auto leaky = fx.pairs(fx.subset({"d2", "d3"}, {"c2"}));
  TrainConfig tcfg;
  tcfg.batch_size = 4;
  tcfg.max_steps = 5;
  CHECK_THROWS_AS(train(m, train_ds, leaky, tcfg), LeakageDetected);

  const auto val_ds = fx.pairs(fx.subset({"d3", "d4"}, {"c2", "c3"}));
  std::vector<float> before;
  for_each_param(m, [&](const std::string&, tensor::Tensor<float>& t) {
    before.insert(before.end(), t.data.begin(), t.data.end());
  });
  tcfg.max_steps = 0;
  const auto res = train(m, train_ds, val_ds, tcfg);
  CHECK(res.log.empty());
  std::vector<float> after;
  for_each_param(m, [&](const std::string&, tensor::Tensor<float>& t) {
    after.insert(after.end(), t.data.begin(), t.data.end());
  });
  CHECK(before == after);
}

TEST_CASE("training reduces loss on a learnable fixture") {
  Fixture fx;
  auto cfg = fx.config(EncoderKind::kDnnFp);
  cfg.dropout = 0.0;
  auto m = build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel});

  const auto train_ds = fx.pairs(fx.subset({"d1", "d2", "d3", "d4"},
                                           {"c0", "c1", "c2", "c3"}));
  const auto val_ds = fx.pairs(fx.subset({"d5", "d6"}, {"c4", "c5"}));
  TrainConfig tcfg;
  tcfg.batch_size = 8;
  tcfg.max_steps = 500;
  tcfg.eval_every = 50;
  tcfg.patience = 100;

  const auto res = train(m, train_ds, val_ds, tcfg);
  REQUIRE(res.log.size() == 500);
  CHECK(res.log.back().step == 500);
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 20; ++i) {
    early += res.log[i].train_mse;
    late += res.log[res.log.size() - 1 - i].train_mse;
  }
  CHECK(late < early);
  CHECK(res.best_val_rmse < 0.5);
  for (size_t i = 1; i < res.log.size(); ++i) {
    CHECK(res.log[i].step == res.log[i - 1].step + 1);
  }
}

TEST_CASE("predict keeps order and repeats identically") {
  Fixture fx;
  auto cfg = fx.config(EncoderKind::kSa);
  auto m = build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel});
  const auto ds = fx.pairs(fx.subset({"d1", "d2", "d3", "d4", "d5"},
                                     {"c0", "c1"}));
  REQUIRE(ds.examples.size() == 10);
  const auto p1 = predict(m, ds);
  const auto p2 = predict(m, ds);
  CHECK(p1.size() == 10);
  CHECK(p1 == p2);
}

TEST_CASE("checkpoints round-trip bit-identical predictions") {
  Fixture fx;
  const auto scratch = fs::current_path() / "model_scratch";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  for (auto kind : {EncoderKind::kDnnFp, EncoderKind::kBrnn, EncoderKind::kScnn,
                    EncoderKind::kSa, EncoderKind::kCa, EncoderKind::kMca}) {
    auto cfg = fx.config(kind);
    auto m = build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel});
    m.ic50_min = -2.5;
    m.ic50_max = 7.75;

    // Perturb running stats away from the defaults so they must round-trip.
    const auto ds = fx.pairs(fx.subset({"d1", "d2"}, {"c0", "c1", "c2"}));
    TrainConfig tcfg;
    tcfg.batch_size = 4;
    tcfg.max_steps = 3;
    tcfg.eval_every = 10;
    const auto val_ds = fx.pairs(fx.subset({"d3"}, {"c3", "c4"}));
    train(m, ds, val_ds, tcfg);

    const auto path = (scratch / (to_string(kind) + ".ckpt")).string();
    save(m, path);
    auto loaded = load(path);
    CHECK(loaded.cfg.encoder_kind == kind);
    CHECK(loaded.ic50_min == m.ic50_min);
    CHECK(loaded.ic50_max == m.ic50_max);
    CHECK(loaded.dict.tokens() == m.dict.tokens());
    CHECK(loaded.panel.genes == m.panel.genes);
    CHECK(predict(loaded, ds) == predict(m, ds));
  }
}

TEST_CASE("corrupt and mismatched checkpoints are rejected") {
  Fixture fx;
  const auto scratch = fs::current_path() / "model_scratch";
  fs::create_directories(scratch);
  auto cfg = fx.config(EncoderKind::kSa);
  auto m = build<float>(cfg, fx.dict, netprop::GenePanel{fx.panel});
  const auto path = (scratch / "corrupt.ckpt").string();
  save(m, path);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  in.close();

  {
    std::ofstream out(path + ".trunc", std::ios::binary);
    out.write(bytes.data(), static_cast<long>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load(path + ".trunc"), CorruptCheckpoint);

  {
    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x40;
    std::ofstream out(path + ".flip", std::ios::binary);
    out.write(flipped.data(), static_cast<long>(flipped.size()));
  }
  CHECK_THROWS_AS(load(path + ".flip"), CorruptCheckpoint);

  {
    // Bump the version and refresh the CRC trailer so only the version
    // check can object.
    auto bumped = bytes;
    const auto pos = bumped.find("format_version=1");
    REQUIRE(pos != std::string::npos);
    bumped[pos + 15] = '9';
    const auto body = static_cast<uInt>(bumped.size() - 4);
    const auto crc = crc32(
        0L, reinterpret_cast<const Bytef*>(bumped.data()), body);
    for (int i = 0; i < 4; ++i) {
      bumped[body + i] = static_cast<char>((crc >> (8 * i)) & 0xff);
    }
    std::ofstream out(path + ".ver", std::ios::binary);
    out.write(bumped.data(), static_cast<long>(bumped.size()));
  }
  CHECK_THROWS_AS(load(path + ".ver"), VersionMismatch);

  CHECK_THROWS_AS(load((scratch / "missing.ckpt").string()), common::IoError);
}

TEST_CASE("evaluate computes rmse and pearson") {
  const auto perfect = evaluate({0.1, 0.5, 0.9}, {0.1, 0.5, 0.9});
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.pearson == doctest::Approx(1.0));
  CHECK(perfect.n == 3);

  const auto anti = evaluate({0.0, 1.0}, {1.0, 0.0});
  CHECK(anti.rmse == doctest::Approx(1.0));
  CHECK(anti.pearson == doctest::Approx(-1.0));

  const auto mixed = evaluate({0.1, 0.2, 0.3}, {0.2, 0.2, 0.2});
  CHECK(mixed.rmse == doctest::Approx(std::sqrt(0.02 / 3)));

  CHECK_THROWS_AS(evaluate({0.1}, {0.1, 0.2}), LengthMismatch);
  CHECK_THROWS_AS(evaluate({0.1, 0.2}, {0.5, 0.5}), ConstantVector);
  CHECK_THROWS_AS(evaluate({}, {}), LengthMismatch);
}

TEST_CASE("mann_whitney_u matches exhaustive enumeration") {
  const auto sep = mann_whitney_u({1, 2, 3}, {4, 5, 6}, Alternative::kLess);
  CHECK(sep.u == 0.0);
  CHECK(sep.exact);
  CHECK(sep.p == doctest::Approx(0.05));

  const auto rev = mann_whitney_u({5}, {1}, Alternative::kLess);
  CHECK(rev.u == 1.0);
  CHECK(rev.p == doctest::Approx(1.0));

  const auto same =
      mann_whitney_u({1, 2, 3}, {1, 2, 3}, Alternative::kLess);
  CHECK(same.p >= 0.5);

  const auto greater =
      mann_whitney_u({4, 5, 6}, {1, 2, 3}, Alternative::kGreater);
  CHECK(greater.p == doctest::Approx(0.05));

  CHECK(alternative_from("a<b") == Alternative::kLess);
  CHECK(alternative_from("a>b") == Alternative::kGreater);
  CHECK_THROWS(alternative_from("two-sided"));
  CHECK_THROWS_AS(mann_whitney_u({}, {1.0}, Alternative::kLess), EmptySample);

  // Ties flow through midranks: identical constant samples are symmetric.
  const auto tied =
      mann_whitney_u({2, 2, 2}, {2, 2, 2}, Alternative::kLess);
  CHECK(tied.u == doctest::Approx(4.5));
  CHECK(tied.p >= 0.5);

  // Large samples switch to the normal path.
  std::vector<double> big_a, big_b;
  for (int i = 0; i < 30; ++i) {
    big_a.push_back(i);
    big_b.push_back(i + 0.5);
  }
  const auto approx = mann_whitney_u(big_a, big_b, Alternative::kLess);
  CHECK(!approx.exact);
  CHECK(approx.p > 0.0);
  CHECK(approx.p < 1.0);
}
