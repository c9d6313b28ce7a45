//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "paccmann/common/error.hpp"
#include "paccmann/common/hash.hpp"
#include "paccmann/common/parallel.hpp"
#include "paccmann/dataio/dataio.hpp"
#include "paccmann/model/checkpoint.hpp"
#include "paccmann/model/metrics.hpp"
#include "paccmann/model/model.hpp"
#include "paccmann/netprop/netprop.hpp"
#include "paccmann/smiles/augment.hpp"
#include "paccmann/smiles/token.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace paccmann;

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string expression, drugs, sensitivity, ppi;
  std::string panel, split, checkpoint, pairs;
  std::string out = "out";
  uint64_t seed = 42;
  // propagation
  double alpha = 0.7;
  double tol = 1e-6;
  int max_iters = 10000;
  int panel_size = 20;
  // data
  int fold = 0;
  int augment = 32;
  // model + training
  model::ModelConfig mcfg;
  model::TrainConfig tcfg;
  // attention
  std::string drug_id, cell_id;
  bool tokens = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw common::IoError("cannot open: " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw common::IoError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw common::IoError("write failed: " + path.string());
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw common::InputError(path + ": " + e.what());
  }
  if (!j.is_object()) throw common::InputError(path + ": expected an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "expression") cfg.expression = value.get<std::string>();
      else if (key == "drugs") cfg.drugs = value.get<std::string>();
      else if (key == "sensitivity") cfg.sensitivity = value.get<std::string>();
      else if (key == "ppi") cfg.ppi = value.get<std::string>();
      else if (key == "panel") cfg.panel = value.get<std::string>();
      else if (key == "split") cfg.split = value.get<std::string>();
      else if (key == "checkpoint") cfg.checkpoint = value.get<std::string>();
      else if (key == "pairs") cfg.pairs = value.get<std::string>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "seed") cfg.seed = value.get<uint64_t>();
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "tol") cfg.tol = value.get<double>();
      else if (key == "max_iters") cfg.max_iters = value.get<int>();
      else if (key == "panel_size") cfg.panel_size = value.get<int>();
      else if (key == "fold") cfg.fold = value.get<int>();
      else if (key == "augment") cfg.augment = value.get<int>();
      else if (key == "encoder")
        cfg.mcfg.encoder_kind = model::encoder_kind_from(value.get<std::string>());
      else if (key == "dense_layers")
        cfg.mcfg.dense_layers = value.get<std::vector<int>>();
      else if (key == "dropout") cfg.mcfg.dropout = value.get<double>();
      else if (key == "h") cfg.mcfg.h = value.get<int>();
      else if (key == "attention_size")
        cfg.mcfg.attention_size = value.get<int>();
      else if (key == "conv_attention_size")
        cfg.mcfg.conv_attention_size = value.get<int>();
      else if (key == "mca_kernel_a") cfg.mcfg.mca_kernel_a = value.get<int>();
      else if (key == "mca_kernel_b") cfg.mcfg.mca_kernel_b = value.get<int>();
      else if (key == "mca_filters") cfg.mcfg.mca_filters = value.get<int>();
      else if (key == "max_smiles_len")
        cfg.mcfg.max_smiles_len = value.get<int>();
      else if (key == "batch_size") cfg.tcfg.batch_size = value.get<int>();
      else if (key == "steps") cfg.tcfg.max_steps = value.get<long>();
      else if (key == "eval_every") cfg.tcfg.eval_every = value.get<long>();
      else if (key == "patience") cfg.tcfg.patience = value.get<int>();
      else if (key == "target_val_rmse")
        cfg.tcfg.target_val_rmse = value.get<double>();
      else if (key == "lr") cfg.tcfg.schedule.initial_lr = value.get<double>();
      else if (key == "lr_decay")
        cfg.tcfg.schedule.decay_factor = value.get<double>();
      else if (key == "lr_decay_every")
        cfg.tcfg.schedule.decay_every = value.get<long>();
      else if (key == "drug_id") cfg.drug_id = value.get<std::string>();
      else if (key == "cell_id") cfg.cell_id = value.get<std::string>();
      else if (key == "tokens") cfg.tokens = value.get<bool>();
      else
        throw common::InputError(path + ": unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw common::InputError(path + ": " + e.what());
  }
}

json effective_config(const RunConfig& cfg) {
  json j;
  j["expression"] = cfg.expression;
  j["drugs"] = cfg.drugs;
  j["sensitivity"] = cfg.sensitivity;
  j["ppi"] = cfg.ppi;
  j["panel"] = cfg.panel;
  j["split"] = cfg.split;
  j["checkpoint"] = cfg.checkpoint;
  j["pairs"] = cfg.pairs;
  j["out"] = cfg.out;
  j["seed"] = cfg.seed;
  j["alpha"] = cfg.alpha;
  j["tol"] = cfg.tol;
  j["max_iters"] = cfg.max_iters;
  j["panel_size"] = cfg.panel_size;
  j["fold"] = cfg.fold;
  j["augment"] = cfg.augment;
  j["encoder"] = model::to_string(cfg.mcfg.encoder_kind);
  j["dense_layers"] = cfg.mcfg.dense_layers;
  j["dropout"] = cfg.mcfg.dropout;
  j["h"] = cfg.mcfg.h;
  j["attention_size"] = cfg.mcfg.attention_size;
  j["conv_attention_size"] = cfg.mcfg.conv_attention_size;
  j["mca_kernel_a"] = cfg.mcfg.mca_kernel_a;
  j["mca_kernel_b"] = cfg.mcfg.mca_kernel_b;
  j["mca_filters"] = cfg.mcfg.mca_filters;
  j["max_smiles_len"] = cfg.mcfg.max_smiles_len;
  j["batch_size"] = cfg.tcfg.batch_size;
  j["steps"] = cfg.tcfg.max_steps;
  j["eval_every"] = cfg.tcfg.eval_every;
  j["patience"] = cfg.tcfg.patience;
  j["target_val_rmse"] = cfg.tcfg.target_val_rmse;
  j["lr"] = cfg.tcfg.schedule.initial_lr;
  j["lr_decay"] = cfg.tcfg.schedule.decay_factor;
  j["lr_decay_every"] = cfg.tcfg.schedule.decay_every;
  j["drug_id"] = cfg.drug_id;
  j["cell_id"] = cfg.cell_id;
  j["tokens"] = cfg.tokens;
  return j;
}

void write_manifest(const RunConfig& cfg, const std::string& command) {
  const json config = effective_config(cfg);
  const std::string dump = config.dump(2);
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(
                    common::Fnv1a64().str(dump).digest()));
  json m;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = hash;
  m["seed"] = cfg.seed;
  m["versions"] = {{"paccmann", kVersion}, {"checkpoint_format", 1}};
  write_file(fs::path(cfg.out) / "run_manifest.json", m.dump(2) + "\n");
}

void require_path(const std::string& value, const char* what) {
  if (value.empty()) {
    throw common::InputError(std::string("missing required path: ") + what);
  }
}

netprop::GenePanel read_panel_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw common::IoError("cannot open: " + path);
  netprop::GenePanel panel;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "gene") {
        throw dataio::MalformedCsv(path + ":1: expected header `gene`");
      }
      continue;
    }
    if (!line.empty()) panel.genes.push_back(line);
  }
  std::sort(panel.genes.begin(), panel.genes.end());
  panel.genes.erase(std::unique(panel.genes.begin(), panel.genes.end()),
                    panel.genes.end());
  if (panel.genes.empty()) {
    throw dataio::MalformedCsv(path + ": empty gene panel");
  }
  return panel;
}

struct DrugPropagation {
  std::string drug_id;
  netprop::GeneWeightVector weights;
  netprop::GenePanel panel;
  std::vector<std::string> missing_targets;
  bool skipped = false;  // no resolvable targets
};

// Shared by cmd_propagate and cmd_train's on-the-fly panel computation.
std::vector<DrugPropagation> propagate_all(
    const netprop::PpiNetwork& net, const std::vector<dataio::DrugRecord>& drugs,
    const RunConfig& cfg) {
  netprop::PropagationConfig pcfg;
  pcfg.alpha = cfg.alpha;
  pcfg.tol = cfg.tol;
  pcfg.max_iters = cfg.max_iters;
  const auto aprime = netprop::normalize_adjacency(net);

  std::vector<DrugPropagation> results(drugs.size());
  std::vector<std::exception_ptr> errors(drugs.size());
  common::parallel_for(drugs.size(), [&](size_t i) {
    try {
      const auto& drug = drugs[i];
      auto& r = results[i];
      r.drug_id = drug.drug_id;
      const std::set<std::string> targets(drug.targets.begin(),
                                          drug.targets.end());
      const auto init = netprop::init_weights(targets, net, pcfg);
      r.missing_targets = init.missing_targets;
      if (init.missing_targets.size() == targets.size()) {
        r.skipped = true;
        return;
      }
      const auto prop = netprop::propagate(init.weights, aprime, pcfg);
      r.weights = prop.weights;
      r.panel = netprop::select_top_genes(prop.weights, cfg.panel_size);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& r : results) {
    if (!r.missing_targets.empty()) {
      std::string list;
      for (const auto& t : r.missing_targets) {
        if (!list.empty()) list += ", ";
        list += t;
      }
      std::cerr << "warning: " << r.drug_id
                << ": targets not in network: " << list << "\n";
    }
    if (r.skipped) {
      std::cerr << "warning: " << r.drug_id
                << ": no resolvable targets, excluded from the panel\n";
    }
  }
  return results;
}

netprop::GenePanel pooled_panel(const std::vector<DrugPropagation>& results) {
  std::vector<netprop::GenePanel> panels;
  for (const auto& r : results) {
    if (!r.skipped) panels.push_back(r.panel);
  }
  if (panels.empty()) {
    throw common::InputError("no drug produced a gene panel");
  }
  return netprop::pool_panels(panels);
}

int cmd_propagate(const RunConfig& cfg) {
  require_path(cfg.ppi, "ppi");
  require_path(cfg.drugs, "drugs");
  const auto net = dataio::load_ppi(cfg.ppi);
  const auto drugs = dataio::load_drugs(cfg.drugs);
  const auto results = propagate_all(net, drugs, cfg);

  fs::create_directories(fs::path(cfg.out) / "weights");
  for (const auto& r : results) {
    if (r.skipped) continue;
    std::string csv = "gene,weight\n";
    for (size_t i = 0; i < r.weights.genes.size(); ++i) {
      csv += r.weights.genes[i] + "," +
             fmt_g(r.weights.values(static_cast<Eigen::Index>(i))) + "\n";
    }
    write_file(fs::path(cfg.out) / "weights" / (r.drug_id + ".csv"), csv);
  }
  const auto pool = pooled_panel(results);
  std::string csv = "gene\n";
  for (const auto& g : pool.genes) csv += g + "\n";
  write_file(fs::path(cfg.out) / "panel.csv", csv);
  write_manifest(cfg, "propagate");
  std::cout << "panel_genes=" << pool.genes.size() << "\n";
  return 0;
}

int cmd_split(const RunConfig& cfg) {
  require_path(cfg.drugs, "drugs");
  require_path(cfg.expression, "expression");
  const auto drugs = dataio::load_drugs(cfg.drugs);
  const auto expr = dataio::load_expression(cfg.expression);
  std::vector<std::string> drug_ids, cell_ids;
  for (const auto& d : drugs) drug_ids.push_back(d.drug_id);
  for (const auto& e : expr) cell_ids.push_back(e.cell_id);
  const auto plan = dataio::make_split(drug_ids, cell_ids, cfg.seed);
  write_file(fs::path(cfg.out) / "split.json", plan.to_json());
  write_manifest(cfg, "split");
  std::cout << "test_drugs=" << plan.test_drugs.size()
            << " test_cells=" << plan.test_cells.size() << "\n";
  return 0;
}

// The dictionary and the padded length cover every augmented variant of
// every drug, so later splits and predictions stay inside the trained
// token space.
void derive_token_space(const std::vector<dataio::DrugRecord>& drugs,
                        int augment_n, uint64_t seed,
                        smiles::TokenDictionary* dict, int* max_len) {
  std::vector<std::string> corpus;
  size_t longest = 0;
  const common::Rng root(seed);
  for (const auto& d : drugs) {
    const auto variants =
        smiles::augment(d.smiles, augment_n, root.fork(d.drug_id).seed());
    for (const auto& v : variants) {
      longest = std::max(longest, smiles::tokenize(v).size());
      corpus.push_back(v);
    }
  }
  *dict = smiles::build_dictionary(corpus);
  *max_len = static_cast<int>(longest);
}

int cmd_train(RunConfig cfg) {
  require_path(cfg.expression, "expression");
  require_path(cfg.drugs, "drugs");
  require_path(cfg.sensitivity, "sensitivity");
  const auto expr = dataio::load_expression(cfg.expression);
  const auto drugs = dataio::load_drugs(cfg.drugs);
  auto records = dataio::load_sensitivity(cfg.sensitivity);
  const auto bounds = dataio::normalize_ic50(records);

  netprop::GenePanel panel;
  if (!cfg.panel.empty()) {
    panel = read_panel_csv(cfg.panel);
  } else if (!cfg.ppi.empty()) {
    const auto net = dataio::load_ppi(cfg.ppi);
    panel = pooled_panel(propagate_all(net, drugs, cfg));
  } else {
    throw common::InputError("train needs `panel` or `ppi`");
  }

  dataio::SplitPlan plan;
  if (!cfg.split.empty()) {
    plan = dataio::SplitPlan::from_json(read_file(cfg.split));
  } else {
    std::vector<std::string> drug_ids, cell_ids;
    for (const auto& d : drugs) drug_ids.push_back(d.drug_id);
    for (const auto& e : expr) cell_ids.push_back(e.cell_id);
    plan = dataio::make_split(drug_ids, cell_ids, cfg.seed);
  }
  write_file(fs::path(cfg.out) / "split.json", plan.to_json());

  const auto train_pairs =
      dataio::build_pairs(records, drugs, expr, panel,
                          dataio::train_subset(plan, cfg.fold), cfg.augment,
                          cfg.seed);
  const auto val_pairs =
      dataio::build_pairs(records, drugs, expr, panel,
                          dataio::val_subset(plan, cfg.fold), cfg.augment,
                          cfg.seed);

  smiles::TokenDictionary dict;
  int derived_len = 0;
  derive_token_space(drugs, cfg.augment, cfg.seed, &dict, &derived_len);
  if (cfg.mcfg.max_smiles_len == 0) {
    cfg.mcfg.max_smiles_len =
        std::max(derived_len, cfg.mcfg.min_smiles_len());
  }
  cfg.mcfg.gene_panel_size = static_cast<int>(panel.genes.size());
  cfg.mcfg.seed = cfg.seed;

  auto m = model::build<float>(cfg.mcfg, dict, panel);
  m.ic50_min = bounds.first;
  m.ic50_max = bounds.second;
  const auto result = model::train(m, train_pairs, val_pairs, cfg.tcfg);
  model::save(m, (fs::path(cfg.out) / "model.ckpt").string());

  std::string log = "step,train_mse,val_rmse,lr\n";
  for (const auto& row : result.log) {
    log += std::to_string(row.step) + "," + fmt_g(row.train_mse) + "," +
           fmt_g(row.val_rmse) + "," + fmt_g(row.lr) + "\n";
  }
  write_file(fs::path(cfg.out) / "train_log.csv", log);
  write_manifest(cfg, "train");
  std::cout << "best_val_rmse=" << fmt_g(result.best_val_rmse)
            << " best_step=" << result.best_step
            << " train_tuples=" << train_pairs.examples.size()
            << " val_tuples=" << val_pairs.examples.size() << "\n";
  return 0;
}

struct PredictionRun {
  std::vector<dataio::SensitivityRecord> records;
  std::vector<double> predictions;  // normalized scale
  std::vector<double> targets;      // normalized scale
  model::Model<float> m;
};

PredictionRun run_predictions(const RunConfig& cfg) {
  require_path(cfg.checkpoint, "checkpoint");
  require_path(cfg.expression, "expression");
  require_path(cfg.drugs, "drugs");
  const std::string pairs_path =
      cfg.pairs.empty() ? cfg.sensitivity : cfg.pairs;
  require_path(pairs_path, "pairs");

  PredictionRun run{
      {}, {}, {}, model::load(cfg.checkpoint)};
  const auto expr = dataio::load_expression(cfg.expression);
  const auto drugs = dataio::load_drugs(cfg.drugs);
  run.records = dataio::load_sensitivity(pairs_path);
  if (run.records.empty()) {
    throw common::InputError(pairs_path + ": no pairs to score");
  }
  dataio::SubsetSpec subset;
  for (auto& r : run.records) {
    r.ic50_norm =
        dataio::normalize_ic50_value(r.ic50_raw, run.m.ic50_min,
                                     run.m.ic50_max);
    subset.drugs.insert(r.drug_id);
    subset.cells.insert(r.cell_id);
  }
  const auto ds = dataio::build_pairs(run.records, drugs, expr, run.m.panel,
                                      subset, 1, cfg.seed);
  run.predictions = model::predict(run.m, ds);
  for (const auto& ex : ds.examples) run.targets.push_back(ex.ic50_norm);
  return run;
}

void write_predictions_csv(const RunConfig& cfg, const PredictionRun& run) {
  std::string csv = "drug_id,cell_id,ic50_true,ic50_pred\n";
  const double lo = run.m.ic50_min, hi = run.m.ic50_max;
  for (size_t i = 0; i < run.records.size(); ++i) {
    const double raw_pred = lo + run.predictions[i] * (hi - lo);
    csv += run.records[i].drug_id + "," + run.records[i].cell_id + "," +
           fmt_g(run.records[i].ic50_raw) + "," + fmt_g(raw_pred) + "\n";
  }
  write_file(fs::path(cfg.out) / "predictions.csv", csv);
}

int cmd_predict(const RunConfig& cfg) {
  const auto run = run_predictions(cfg);
  write_predictions_csv(cfg, run);
  write_manifest(cfg, "predict");
  std::cout << "n=" << run.predictions.size() << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  const auto run = run_predictions(cfg);
  write_predictions_csv(cfg, run);
  const auto metrics = model::evaluate(run.predictions, run.targets);
  write_manifest(cfg, "evaluate");
  std::printf("rmse=%.4f pearson=%.4f n=%ld\n", metrics.rmse, metrics.pearson,
              metrics.n);
  return 0;
}

int cmd_attention(const RunConfig& cfg) {
  require_path(cfg.checkpoint, "checkpoint");
  require_path(cfg.expression, "expression");
  require_path(cfg.drugs, "drugs");
  if (cfg.drug_id.empty() || cfg.cell_id.empty()) {
    throw common::InputError("attention needs --drug and --cell");
  }
  auto m = model::load(cfg.checkpoint);
  const auto drugs = dataio::load_drugs(cfg.drugs);
  const auto expr = dataio::load_expression(cfg.expression);

  const dataio::DrugRecord* drug = nullptr;
  for (const auto& d : drugs) {
    if (d.drug_id == cfg.drug_id) drug = &d;
  }
  if (!drug) {
    throw dataio::UnresolvedId("unknown drug_id '" + cfg.drug_id + "'");
  }
  const dataio::ExpressionProfile* cell = nullptr;
  for (const auto& e : expr) {
    if (e.cell_id == cfg.cell_id) cell = &e;
  }
  if (!cell) {
    throw dataio::UnresolvedId("unknown cell_id '" + cfg.cell_id + "'");
  }
  std::vector<double> ctx;
  std::vector<std::string> missing;
  for (const auto& gene : m.panel.genes) {
    const auto it = cell->values.find(gene);
    if (it == cell->values.end()) {
      missing.push_back(gene);
    } else {
      ctx.push_back(it->second);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& g : missing) {
      if (!list.empty()) list += ", ";
      list += g;
    }
    throw dataio::PanelGeneMissing("panel genes missing from '" +
                                   cfg.cell_id + "': " + list);
  }

  const auto report = model::attention_export(m, drug->smiles, ctx);
  if (cfg.tokens && !report.has_token_attention) {
    throw common::InputError("encoder " + model::to_string(m.cfg.encoder_kind) +
                             " produces no token attention");
  }

  auto genes = report.gene_weights;
  std::sort(genes.begin(), genes.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::string csv = "gene,weight\n";
  for (const auto& [gene, weight] : genes) {
    csv += gene + "," + fmt_g(weight) + "\n";
  }
  write_file(fs::path(cfg.out) / "gene_attention.csv", csv);

  if (report.has_token_attention) {
    std::string tok_csv = "position,token,weight\n";
    for (const auto& [pos, token, weight] : report.token_weights) {
      tok_csv += std::to_string(pos) + "," + token + "," + fmt_g(weight) + "\n";
    }
    write_file(fs::path(cfg.out) / "token_attention.csv", tok_csv);
  }
  write_manifest(cfg, "attention");
  std::cout << "genes=" << genes.size()
            << " tokens=" << report.token_weights.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paccmann: multi-modal drug sensitivity prediction"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, encoder_name;
  RunConfig cfg;
  bool have_encoder = false, have_steps = false, have_seed = false,
       have_out = false;
  long steps_flag = 0;
  uint64_t seed_flag = 0;
  std::string out_flag;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_flag, "output directory");
  app.add_option("--seed", seed_flag, "random seed");
  app.add_option("--encoder", encoder_name,
                 "encoder kind (DNN_FP, bRNN, SCNN, SA, CA, MCA)");
  app.add_option("--steps", steps_flag, "training step budget");

  auto* propagate = app.add_subcommand("propagate", "compute gene panels");
  auto* split = app.add_subcommand("split", "generate the split plan");
  auto* train = app.add_subcommand("train", "train a model");
  auto* predict = app.add_subcommand("predict", "write predictions");
  auto* evaluate = app.add_subcommand("evaluate", "score predictions");
  auto* attention = app.add_subcommand("attention", "export attention weights");
  attention->add_option("--drug", cfg.drug_id, "drug id to explain");
  attention->add_option("--cell", cfg.cell_id, "cell line id");
  attention->add_flag("--tokens", cfg.tokens, "require token attention");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  have_encoder = app.count("--encoder") > 0;
  have_steps = app.count("--steps") > 0;
  have_seed = app.count("--seed") > 0;
  have_out = app.count("--out") > 0;

  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    if (have_out) cfg.out = out_flag;
    if (have_seed) cfg.seed = seed_flag;
    if (have_encoder) {
      cfg.mcfg.encoder_kind = model::encoder_kind_from(encoder_name);
    }
    if (have_steps) cfg.tcfg.max_steps = steps_flag;
    fs::create_directories(cfg.out);

    if (propagate->parsed()) return cmd_propagate(cfg);
    if (split->parsed()) return cmd_split(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (predict->parsed()) return cmd_predict(cfg);
    if (evaluate->parsed()) return cmd_evaluate(cfg);
    if (attention->parsed()) return cmd_attention(cfg);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const common::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const common::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
