//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

long count_lines(const std::string& text) {
  long n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

// Splits a csv body (header skipped) and sums the last column.
double sum_last_column(const std::string& csv, long* rows = nullptr) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  double sum = 0.0;
  long n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto pos = line.rfind(',');
    REQUIRE(pos != std::string::npos);
    sum += std::stod(line.substr(pos + 1));
    ++n;
  }
  if (rows) *rows = n;
  return sum;
}

struct Cli {
  int code = -1;
  std::string out, err;
};

const fs::path& scratch();

Cli run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path dir = scratch() / ("io_" + std::to_string(counter++));
  fs::create_directories(dir);
  const auto out_f = dir / "stdout.txt";
  const auto err_f = dir / "stderr.txt";
  const std::string cmd = std::string(PACCMANN_BIN) + " " + args + " > " +
                          out_f.string() + " 2> " + err_f.string();
  const int rc = std::system(cmd.c_str());
  Cli r;
  r.code = WEXITSTATUS(rc);
  r.out = slurp(out_f);
  r.err = slurp(err_f);
  return r;
}

// 30 drugs x 30 cells over a six-gene network, written once per process.
const fs::path& scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::current_path() / "cli_scratch";
    fs::remove_all(d);
    fs::create_directories(d);

    const std::vector<std::string> smiles = {
        "CCO",      "CCN",  "CC(C)O", "c1ccccc1", "CC(=O)O",
        "CCCl",     "c1ccncc1", "CC(C)C", "CCOC",  "CC#N"};
    const std::vector<std::string> targets = {
        "g1;g2", "g2;g3", "g3;g4", "g4;g5", "g5;g6",
        "g1;g6", "g2",    "g3;g5", "g1;g4", "g6"};

    std::string drugs = "drug_id,smiles,targets\n";
    for (int i = 0; i < 30; ++i) {
      const std::string id = "d" + std::string(i < 10 ? "0" : "") +
                             std::to_string(i);
      std::string t = targets[i % targets.size()];
      if (i == 28) t = "g2;yy";  // one unknown target
      if (i == 29) t = "zz";     // nothing resolvable
      drugs += id + "," + smiles[i % smiles.size()] + "," + t + "\n";
    }
    spit(d / "drugs.csv", drugs);

    std::string expr = "cell_id,g1,g2,g3,g4,g5,g6";
    std::string expr_nog4 = "cell_id,g1,g2,g3";
    for (int i = 0; i < 30; ++i) {
      const std::string id = "c" + std::string(i < 10 ? "0" : "") +
                             std::to_string(i);
      expr += "\n" + id;
      expr_nog4 += "\n" + id;
      for (int j = 0; j < 6; ++j) {
        const double v = ((i * 7 + j * 3) % 11) / 10.0;
        char buf[16];
        std::snprintf(buf, sizeof(buf), ",%.1f", v);
        expr += buf;
        if (j < 3) expr_nog4 += buf;
      }
    }
    spit(d / "expression.csv", expr + "\n");
    spit(d / "expression_nog4.csv", expr_nog4 + "\n");

    std::string sens = "drug_id,cell_id,ic50\n";
    for (int i = 0; i < 30; ++i) {
      for (int j = 0; j < 30; ++j) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "d%02d,c%02d,%.1f\n", i, j,
                      ((i * 13 + j * 7) % 50) / 10.0);
        sens += buf;
      }
    }
    spit(d / "sensitivity.csv", sens);

    std::string eval_pairs = "drug_id,cell_id,ic50\n";
    for (int i = 0; i < 6; ++i) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "d%02d,c%02d,%.1f\n", i, i,
                    0.5 * (i + 1));
      eval_pairs += buf;
    }
    spit(d / "pairs_eval.csv", eval_pairs);
    spit(d / "pairs_empty.csv", "drug_id,cell_id,ic50\n");

    std::string ppi = "gene_a\tgene_b\tconfidence\n";
    ppi += "g1\tg2\t0.9\ng2\tg3\t0.8\ng3\tg4\t0.7\n";
    ppi += "g4\tg5\t0.6\ng5\tg6\t0.5\ng1\tg6\t0.4\n";
    spit(d / "ppi.tsv", ppi);

    spit(d / "panel.csv", "gene\ng1\ng2\ng3\ng4\n");

    json base;
    base["expression"] = (d / "expression.csv").string();
    base["drugs"] = (d / "drugs.csv").string();
    base["sensitivity"] = (d / "sensitivity.csv").string();
    base["ppi"] = (d / "ppi.tsv").string();
    spit(d / "cfg_prop.json", base.dump(2));

    json train = base;
    train.erase("ppi");
    train["panel"] = (d / "panel.csv").string();
    train["encoder"] = "SA";
    train["h"] = 4;
    train["attention_size"] = 4;
    train["dense_layers"] = {8, 4};
    train["dropout"] = 0.25;
    train["batch_size"] = 16;
    train["steps"] = 4;
    train["eval_every"] = 2;
    train["augment"] = 1;
    spit(d / "cfg_train.json", train.dump(2));
    return d;
  }();
  return dir;
}

// Lazily trained SA checkpoint shared by the downstream commands.
const fs::path& train_dir() {
  static const fs::path dir = [] {
    const fs::path out = scratch() / "train_sa";
    const auto r = run_cli("--config " + (scratch() / "cfg_train.json").string() +
                           " --out " + out.string() + " --seed 7 train");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return out;
  }();
  return dir;
}

const fs::path& train_fp_dir() {
  static const fs::path dir = [] {
    const fs::path out = scratch() / "train_fp";
    const auto r = run_cli("--config " + (scratch() / "cfg_train.json").string() +
                           " --out " + out.string() +
                           " --seed 7 --encoder DNN_FP --steps 2 train");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return out;
  }();
  return dir;
}

json eval_config(const fs::path& pairs) {
  json j;
  j["checkpoint"] = (train_dir() / "model.ckpt").string();
  j["expression"] = (scratch() / "expression.csv").string();
  j["drugs"] = (scratch() / "drugs.csv").string();
  j["pairs"] = pairs.string();
  return j;
}

}  // namespace

TEST_CASE("propagate writes per-drug weights and the pooled panel") {
  const fs::path out = scratch() / "prop";
  const auto r = run_cli("--config " + (scratch() / "cfg_prop.json").string() +
                         " --out " + out.string() + " propagate");
  CHECK(r.code == 0);
  CHECK(r.out.find("panel_genes=") == 0);

  const auto panel = slurp(out / "panel.csv");
  REQUIRE(panel.rfind("gene\n", 0) == 0);
  CHECK(count_lines(panel) >= 2);  // header + at least one gene

  const auto weights = slurp(out / "weights" / "d00.csv");
  CHECK(weights.rfind("gene,weight\n", 0) == 0);
  CHECK(count_lines(weights) == 7);  // six network genes

  // d28 carries one unknown target, d29 nothing resolvable.
  CHECK(r.err.find("d28: targets not in network: yy") != std::string::npos);
  CHECK(r.err.find("d29: no resolvable targets") != std::string::npos);
  CHECK(!fs::exists(out / "weights" / "d29.csv"));

  const auto manifest = slurp(out / "run_manifest.json");
  CHECK(manifest.find("\"command\": \"propagate\"") != std::string::npos);
  CHECK(manifest.find("config_hash") != std::string::npos);
}

TEST_CASE("propagate without a network exits 2") {
  json cfg;
  cfg["drugs"] = (scratch() / "drugs.csv").string();
  spit(scratch() / "cfg_noppi.json", cfg.dump());
  const auto r = run_cli("--config " + (scratch() / "cfg_noppi.json").string() +
                         " --out " + (scratch() / "noppi").string() +
                         " propagate");
  CHECK(r.code == 2);
  CHECK(r.err.find("missing required path: ppi") != std::string::npos);
}

TEST_CASE("split writes a ten-percent test plan") {
  const fs::path out = scratch() / "split";
  const auto r = run_cli("--config " + (scratch() / "cfg_prop.json").string() +
                         " --out " + out.string() + " --seed 5 split");
  CHECK(r.code == 0);
  CHECK(r.out == "test_drugs=3 test_cells=3\n");
  const auto plan = slurp(out / "split.json");
  CHECK(plan.find("\"test_drugs\"") != std::string::npos);
  CHECK(json::parse(plan)["folds"].size() == 25);
}

TEST_CASE("train writes checkpoint, log, and manifest deterministically") {
  const auto& out = train_dir();
  CHECK(fs::exists(out / "model.ckpt"));
  CHECK(fs::exists(out / "split.json"));

  const auto log = slurp(out / "train_log.csv");
  REQUIRE(log.rfind("step,train_mse,val_rmse,lr\n", 0) == 0);
  CHECK(count_lines(log) == 5);  // header + one row per step
  CHECK(log.find("\n1,") != std::string::npos);
  CHECK(log.find("\n4,") != std::string::npos);

  const auto manifest = slurp(out / "run_manifest.json");
  CHECK(manifest.find("\"command\": \"train\"") != std::string::npos);

  // Same seed, byte-identical artifacts.
  const fs::path redo = scratch() / "train_sa_redo";
  const auto r = run_cli("--config " + (scratch() / "cfg_train.json").string() +
                         " --out " + redo.string() + " --seed 7 train");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(slurp(redo / "train_log.csv") == log);
  CHECK(slurp(redo / "model.ckpt") == slurp(out / "model.ckpt"));

  // A different seed changes the trajectory.
  const fs::path other = scratch() / "train_sa_seed9";
  const auto r9 = run_cli("--config " + (scratch() / "cfg_train.json").string() +
                          " --out " + other.string() + " --seed 9 train");
  REQUIRE_MESSAGE(r9.code == 0, r9.err);
  CHECK(slurp(other / "train_log.csv") != log);
}

TEST_CASE("train rejects a split plan that leaks an entity") {
  json plan;
  plan["seed"] = 0;
  plan["test_drugs"] = {"d00"};
  plan["test_cells"] = {"c00"};
  plan["folds"] = json::array();
  // d01 sits in two fold blocks, so fold 0 validation shares it with the
  // training pool.
  plan["folds"].push_back({{"val_drugs", {"d01"}}, {"val_cells", {"c01"}}});
  plan["folds"].push_back({{"val_drugs", {"d01", "d02"}},
                           {"val_cells", {"c02"}}});
  spit(scratch() / "leaky_split.json", plan.dump());

  json cfg = json::parse(slurp(scratch() / "cfg_train.json"));
  cfg["split"] = (scratch() / "leaky_split.json").string();
  spit(scratch() / "cfg_leaky.json", cfg.dump());

  const auto r = run_cli("--config " + (scratch() / "cfg_leaky.json").string() +
                         " --out " + (scratch() / "leaky").string() +
                         " --seed 7 train");
  CHECK(r.code == 3);
  CHECK(r.err.find("shared between train and val") != std::string::npos);
}

TEST_CASE("evaluate prints metrics and writes raw-scale predictions") {
  spit(scratch() / "cfg_eval.json",
       eval_config(scratch() / "pairs_eval.csv").dump());
  const fs::path out = scratch() / "eval";
  const auto r = run_cli("--config " + (scratch() / "cfg_eval.json").string() +
                         " --out " + out.string() + " evaluate");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  double rmse = -1, pearson = -2;
  long n = 0;
  REQUIRE(std::sscanf(r.out.c_str(), "rmse=%lf pearson=%lf n=%ld", &rmse,
                      &pearson, &n) == 3);
  CHECK(n == 6);
  CHECK(rmse >= 0.0);
  CHECK(rmse <= 1.0);  // both sides live on the normalized scale
  CHECK(pearson >= -1.0);
  CHECK(pearson <= 1.0);

  const auto preds = slurp(out / "predictions.csv");
  REQUIRE(preds.rfind("drug_id,cell_id,ic50_true,ic50_pred\n", 0) == 0);
  CHECK(count_lines(preds) == 7);
  CHECK(preds.find("d00,c00,0.5,") != std::string::npos);
}

TEST_CASE("evaluate with no pairs exits 2") {
  spit(scratch() / "cfg_eval_empty.json",
       eval_config(scratch() / "pairs_empty.csv").dump());
  const auto r =
      run_cli("--config " + (scratch() / "cfg_eval_empty.json").string() +
              " --out " + (scratch() / "eval_empty").string() + " evaluate");
  CHECK(r.code == 2);
  CHECK(r.err.find("no pairs to score") != std::string::npos);
}

TEST_CASE("evaluate against an expression table missing a panel gene exits 2") {
  json cfg = eval_config(scratch() / "pairs_eval.csv");
  cfg["expression"] = (scratch() / "expression_nog4.csv").string();
  spit(scratch() / "cfg_eval_nog4.json", cfg.dump());
  const auto r =
      run_cli("--config " + (scratch() / "cfg_eval_nog4.json").string() +
              " --out " + (scratch() / "eval_nog4").string() + " evaluate");
  CHECK(r.code == 2);
  CHECK(r.err.find("g4") != std::string::npos);
}

TEST_CASE("predict writes one row per pair") {
  spit(scratch() / "cfg_pred.json",
       eval_config(scratch() / "pairs_eval.csv").dump());
  const fs::path out = scratch() / "pred";
  const auto r = run_cli("--config " + (scratch() / "cfg_pred.json").string() +
                         " --out " + out.string() + " predict");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out == "n=6\n");
  CHECK(count_lines(slurp(out / "predictions.csv")) == 7);
}

TEST_CASE("attention exports normalized gene and token weights") {
  json cfg = eval_config(scratch() / "pairs_eval.csv");
  cfg.erase("pairs");
  spit(scratch() / "cfg_att.json", cfg.dump());
  const fs::path out = scratch() / "att";
  const auto r = run_cli("--config " + (scratch() / "cfg_att.json").string() +
                         " --out " + out.string() +
                         " attention --drug d03 --cell c05 --tokens");
  REQUIRE_MESSAGE(r.code == 0, r.err);

  const auto genes = slurp(out / "gene_attention.csv");
  REQUIRE(genes.rfind("gene,weight\n", 0) == 0);
  long gene_rows = 0;
  const double gene_sum = sum_last_column(genes, &gene_rows);
  CHECK(gene_rows == 4);  // the panel
  CHECK(std::abs(gene_sum - 1.0) < 1e-4);

  // d03 is benzene: eight tokens, attention mass only on real positions.
  const auto tokens = slurp(out / "token_attention.csv");
  REQUIRE(tokens.rfind("position,token,weight\n", 0) == 0);
  long token_rows = 0;
  const double token_sum = sum_last_column(tokens, &token_rows);
  CHECK(token_rows == 8);
  CHECK(std::abs(token_sum - 1.0) < 1e-4);
  CHECK(r.out == "genes=4 tokens=8\n");

  const auto bad = run_cli("--config " + (scratch() / "cfg_att.json").string() +
                           " --out " + (scratch() / "att_bad").string() +
                           " attention --drug nope --cell c05");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("unknown drug_id") != std::string::npos);
}

TEST_CASE("attention on a fingerprint model has no token view") {
  json cfg = eval_config(scratch() / "pairs_eval.csv");
  cfg.erase("pairs");
  cfg["checkpoint"] = (train_fp_dir() / "model.ckpt").string();
  spit(scratch() / "cfg_att_fp.json", cfg.dump());

  const fs::path out = scratch() / "att_fp";
  const auto ok = run_cli("--config " + (scratch() / "cfg_att_fp.json").string() +
                          " --out " + out.string() +
                          " attention --drug d03 --cell c05");
  REQUIRE_MESSAGE(ok.code == 0, ok.err);
  CHECK(ok.out == "genes=4 tokens=0\n");
  CHECK(fs::exists(out / "gene_attention.csv"));
  CHECK(!fs::exists(out / "token_attention.csv"));

  const auto bad =
      run_cli("--config " + (scratch() / "cfg_att_fp.json").string() +
              " --out " + (scratch() / "att_fp_bad").string() +
              " attention --drug d03 --cell c05 --tokens");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("no token attention") != std::string::npos);
}
