//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include "paccmann/dataio/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "paccmann/common/rng.hpp"
#include "paccmann/smiles/augment.hpp"
#include "paccmann/smiles/graph.hpp"

namespace paccmann::dataio {

namespace {

// Plain separated-values reader; fields may not contain the separator
// (quoting is not part of any ingestion format here).
std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string location(const std::string& path, long line) {
  return path + ":" + std::to_string(line) + ": ";
}

// Reads all lines, tolerating CRLF and a missing final newline.
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw common::IoError("cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw MalformedCsv(path + ": empty file");
  return lines;
}

double parse_real(const std::string& s, const std::string& path, long line) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception&) {
    throw NonNumericValue(location(path, line) + "not a finite number: '" +
                          s + "'");
  }
}

}  // namespace

std::vector<ExpressionProfile> load_expression(const std::string& path) {
  const auto lines = read_lines(path);
  const auto header = split_fields(lines[0], ',');
  if (header.size() < 2 || header[0] != "cell_id") {
    throw MalformedCsv(location(path, 1) +
                       "expected header `cell_id,<gene>,...`");
  }
  std::set<std::string> gene_set;
  for (size_t j = 1; j < header.size(); ++j) {
    if (header[j].empty() || !gene_set.insert(header[j]).second) {
      throw MalformedCsv(location(path, 1) + "empty or duplicate gene column '" +
                         header[j] + "'");
    }
  }
  std::vector<ExpressionProfile> profiles;
  std::set<std::string> seen;
  for (size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i) + 1;
    const auto fields = split_fields(lines[i], ',');
    if (fields.size() != header.size()) {
      throw MalformedCsv(location(path, line_no) + "expected " +
                         std::to_string(header.size()) + " fields, found " +
                         std::to_string(fields.size()));
    }
    if (fields[0].empty()) {
      throw MalformedCsv(location(path, line_no) + "empty cell_id");
    }
    if (!seen.insert(fields[0]).second) {
      throw DuplicateCellId(location(path, line_no) + "duplicate cell_id '" +
                            fields[0] + "'");
    }
    ExpressionProfile p;
    p.cell_id = fields[0];
    for (size_t j = 1; j < fields.size(); ++j) {
      p.values[header[j]] = parse_real(fields[j], path, line_no);
    }
    profiles.push_back(std::move(p));
  }
  return profiles;
}

std::vector<DrugRecord> load_drugs(const std::string& path) {
  const auto lines = read_lines(path);
  const auto header = split_fields(lines[0], ',');
  bool with_smiles;
  if (header == std::vector<std::string>{"drug_id", "smiles", "targets"}) {
    with_smiles = true;
  } else if (header == std::vector<std::string>{"drug_id", "targets"}) {
    with_smiles = false;
  } else {
    throw MalformedCsv(location(path, 1) +
                       "expected header `drug_id,smiles,targets` or "
                       "`drug_id,targets`");
  }
  std::vector<DrugRecord> drugs;
  std::set<std::string> seen;
  for (size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i) + 1;
    const auto fields = split_fields(lines[i], ',');
    if (fields.size() != header.size()) {
      throw MalformedCsv(location(path, line_no) + "expected " +
                         std::to_string(header.size()) + " fields, found " +
                         std::to_string(fields.size()));
    }
    DrugRecord d;
    d.drug_id = fields[0];
    if (d.drug_id.empty()) {
      throw MalformedCsv(location(path, line_no) + "empty drug_id");
    }
    if (!seen.insert(d.drug_id).second) {
      throw MalformedCsv(location(path, line_no) + "duplicate drug_id '" +
                         d.drug_id + "'");
    }
    if (with_smiles) {
      d.smiles = fields[1];
      try {
        smiles::parse(d.smiles);
      } catch (const common::InputError& e) {
        throw MalformedCsv(location(path, line_no) + "invalid SMILES for '" +
                           d.drug_id + "': " + e.what());
      }
    }
    const std::string& targets = fields.back();
    if (!targets.empty()) {
      for (auto& t : split_fields(targets, ';')) {
        if (t.empty()) {
          throw MalformedCsv(location(path, line_no) + "empty target symbol");
        }
        d.targets.push_back(std::move(t));
      }
    }
    drugs.push_back(std::move(d));
  }
  return drugs;
}

std::vector<SensitivityRecord> load_sensitivity(const std::string& path) {
  const auto lines = read_lines(path);
  if (split_fields(lines[0], ',') !=
      std::vector<std::string>{"drug_id", "cell_id", "ic50"}) {
    throw MalformedCsv(location(path, 1) +
                       "expected header `drug_id,cell_id,ic50`");
  }
  std::vector<SensitivityRecord> records;
  for (size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i) + 1;
    const auto fields = split_fields(lines[i], ',');
    if (fields.size() != 3) {
      throw MalformedCsv(location(path, line_no) +
                         "expected 3 fields, found " +
                         std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw MalformedCsv(location(path, line_no) + "empty id field");
    }
    SensitivityRecord r;
    r.drug_id = fields[0];
    r.cell_id = fields[1];
    r.ic50_raw = parse_real(fields[2], path, line_no);
    records.push_back(std::move(r));
  }
  return records;
}

netprop::PpiNetwork load_ppi(const std::string& path) {
  const auto lines = read_lines(path);
  if (split_fields(lines[0], '\t') !=
      std::vector<std::string>{"gene_a", "gene_b", "confidence"}) {
    throw MalformedCsv(location(path, 1) +
                       "expected header `gene_a\tgene_b\tconfidence`");
  }
  std::vector<netprop::PpiEdge> edges;
  std::set<std::string> nodes;
  for (size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i) + 1;
    const auto fields = split_fields(lines[i], '\t');
    if (fields.size() != 3) {
      throw MalformedCsv(location(path, line_no) +
                         "expected 3 fields, found " +
                         std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw MalformedCsv(location(path, line_no) + "empty gene symbol");
    }
    netprop::PpiEdge e{fields[0], fields[1],
                       parse_real(fields[2], path, line_no)};
    nodes.insert(e.a);
    nodes.insert(e.b);
    edges.push_back(std::move(e));
  }
  try {
    return netprop::PpiNetwork(
        std::vector<std::string>(nodes.begin(), nodes.end()),
        std::move(edges));
  } catch (const common::Error& e) {
    throw MalformedCsv(path + ": " + e.what());
  }
}

std::pair<double, double> normalize_ic50(
    std::vector<SensitivityRecord>& records) {
  if (records.size() < 2) {
    throw DegenerateRange("normalize_ic50: need at least 2 records");
  }
  double lo = records[0].ic50_raw, hi = records[0].ic50_raw;
  for (const auto& r : records) {
    lo = std::min(lo, r.ic50_raw);
    hi = std::max(hi, r.ic50_raw);
  }
  if (lo == hi) {
    throw DegenerateRange("normalize_ic50: all raw values equal " +
                          std::to_string(lo));
  }
  for (auto& r : records) r.ic50_norm = (r.ic50_raw - lo) / (hi - lo);
  return {lo, hi};
}

double normalize_ic50_value(double raw, double lo, double hi) {
  if (hi <= lo) throw DegenerateRange("normalize_ic50_value: empty range");
  const double v = (raw - lo) / (hi - lo);
  return std::clamp(v, 0.0, 1.0);
}

SplitPlan make_split(const std::vector<std::string>& drug_ids,
                     const std::vector<std::string>& cell_ids, uint64_t seed) {
  auto check = [](const std::vector<std::string>& ids, const char* what) {
    if (ids.size() < 25) {
      throw TooFewEntities(std::string("make_split: need at least 25 ") +
                           what + ", got " + std::to_string(ids.size()));
    }
    std::set<std::string> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size()) {
      throw MalformedCsv(std::string("make_split: duplicate ") + what);
    }
  };
  check(drug_ids, "drugs");
  check(cell_ids, "cells");

  SplitPlan plan;
  plan.seed = seed;
  plan.folds.resize(25);
  common::Rng root(seed);

  auto assign = [&](std::vector<std::string> ids, const char* tag,
                    std::vector<std::string>& test,
                    auto member) {
    std::sort(ids.begin(), ids.end());
    auto rng = root.fork(tag);
    rng.shuffle(ids);
    const size_t test_n = (ids.size() + 5) / 10;  // round half-up of 10%
    test.assign(ids.begin(), ids.begin() + test_n);
    std::sort(test.begin(), test.end());
    const size_t pool_n = ids.size() - test_n;
    const size_t base = pool_n / 25, rem = pool_n % 25;
    size_t next = test_n;
    for (size_t f = 0; f < 25; ++f) {
      const size_t take = base + (f < rem ? 1 : 0);
      auto& block = plan.folds[f].*member;
      block.assign(ids.begin() + next, ids.begin() + next + take);
      std::sort(block.begin(), block.end());
      next += take;
    }
  };
  assign(drug_ids, "drugs", plan.test_drugs, &SplitPlan::Fold::val_drugs);
  assign(cell_ids, "cells", plan.test_cells, &SplitPlan::Fold::val_cells);
  return plan;
}

std::string SplitPlan::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["test_drugs"] = test_drugs;
  j["test_cells"] = test_cells;
  j["folds"] = nlohmann::json::array();
  for (const auto& f : folds) {
    j["folds"].push_back(
        {{"val_drugs", f.val_drugs}, {"val_cells", f.val_cells}});
  }
  return j.dump(2) + "\n";
}

SplitPlan SplitPlan::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    SplitPlan plan;
    plan.seed = j.at("seed").get<uint64_t>();
    plan.test_drugs = j.at("test_drugs").get<std::vector<std::string>>();
    plan.test_cells = j.at("test_cells").get<std::vector<std::string>>();
    for (const auto& f : j.at("folds")) {
      SplitPlan::Fold fold;
      fold.val_drugs = f.at("val_drugs").get<std::vector<std::string>>();
      fold.val_cells = f.at("val_cells").get<std::vector<std::string>>();
      plan.folds.push_back(std::move(fold));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedCsv(std::string("split plan: ") + e.what());
  }
}

SubsetSpec test_subset(const SplitPlan& plan) {
  SubsetSpec s;
  s.drugs.insert(plan.test_drugs.begin(), plan.test_drugs.end());
  s.cells.insert(plan.test_cells.begin(), plan.test_cells.end());
  return s;
}

SubsetSpec val_subset(const SplitPlan& plan, int fold) {
  if (fold < 0 || fold >= static_cast<int>(plan.folds.size())) {
    throw common::InvalidConfig("fold index out of range: " +
                                std::to_string(fold));
  }
  SubsetSpec s;
  const auto& f = plan.folds[fold];
  s.drugs.insert(f.val_drugs.begin(), f.val_drugs.end());
  s.cells.insert(f.val_cells.begin(), f.val_cells.end());
  return s;
}

SubsetSpec train_subset(const SplitPlan& plan, int fold) {
  if (fold < 0 || fold >= static_cast<int>(plan.folds.size())) {
    throw common::InvalidConfig("fold index out of range: " +
                                std::to_string(fold));
  }
  SubsetSpec s;
  for (size_t f = 0; f < plan.folds.size(); ++f) {
    if (static_cast<int>(f) == fold) continue;
    s.drugs.insert(plan.folds[f].val_drugs.begin(),
                   plan.folds[f].val_drugs.end());
    s.cells.insert(plan.folds[f].val_cells.begin(),
                   plan.folds[f].val_cells.end());
  }
  return s;
}

namespace {

struct Classified {
  // Indices of sensitivity records with drug AND cell inside the subset.
  std::vector<size_t> included;
  long dropped = 0;
};

Classified classify(const std::vector<SensitivityRecord>& sensitivity,
                    const SubsetSpec& subset) {
  Classified c;
  for (size_t i = 0; i < sensitivity.size(); ++i) {
    const bool drug_in = subset.drugs.count(sensitivity[i].drug_id) > 0;
    const bool cell_in = subset.cells.count(sensitivity[i].cell_id) > 0;
    if (drug_in && cell_in) {
      c.included.push_back(i);
    } else if (drug_in != cell_in) {
      ++c.dropped;  // straddles the subset boundary
    }
  }
  return c;
}

std::vector<std::string> augment_drug(const DrugRecord& drug, int augment_n,
                                      uint64_t seed) {
  const common::Rng root(seed);
  return smiles::augment(drug.smiles, augment_n,
                         root.fork(drug.drug_id).seed());
}

}  // namespace

PairedDataset build_pairs(const std::vector<SensitivityRecord>& sensitivity,
                          const std::vector<DrugRecord>& drugs,
                          const std::vector<ExpressionProfile>& expressions,
                          const netprop::GenePanel& panel,
                          const SubsetSpec& subset, int augment_n,
                          uint64_t seed) {
  if (augment_n < 1) {
    throw common::InvalidConfig("build_pairs: augment_n must be positive");
  }
  std::map<std::string, const DrugRecord*> by_drug;
  for (const auto& d : drugs) by_drug[d.drug_id] = &d;
  std::map<std::string, const ExpressionProfile*> by_cell;
  for (const auto& e : expressions) by_cell[e.cell_id] = &e;

  const auto classified = classify(sensitivity, subset);

  PairedDataset ds;
  ds.panel_genes = panel.genes;
  ds.dropped_records = classified.dropped;

  struct Variant {
    std::string smiles;
    smiles::Fingerprint fp;
  };
  std::map<std::string, std::vector<Variant>> drug_variants;
  std::map<std::string, int> cell_rows;

  for (const size_t i : classified.included) {
    const auto& rec = sensitivity[i];
    const auto drug_it = by_drug.find(rec.drug_id);
    if (drug_it == by_drug.end()) {
      throw UnresolvedId("build_pairs: unknown drug_id '" + rec.drug_id + "'");
    }
    const auto cell_it = by_cell.find(rec.cell_id);
    if (cell_it == by_cell.end()) {
      throw UnresolvedId("build_pairs: unknown cell_id '" + rec.cell_id + "'");
    }

    auto row_it = cell_rows.find(rec.cell_id);
    if (row_it == cell_rows.end()) {
      const auto& profile = *cell_it->second;
      std::vector<double> ctx;
      std::vector<std::string> missing;
      ctx.reserve(panel.genes.size());
      for (const auto& gene : panel.genes) {
        const auto v = profile.values.find(gene);
        if (v == profile.values.end()) {
          missing.push_back(gene);
        } else {
          ctx.push_back(v->second);
        }
      }
      if (!missing.empty()) {
        std::string list;
        for (const auto& g : missing) {
          if (!list.empty()) list += ", ";
          list += g;
        }
        throw PanelGeneMissing("build_pairs: panel genes missing from '" +
                               rec.cell_id + "': " + list);
      }
      row_it = cell_rows
                   .emplace(rec.cell_id,
                            static_cast<int>(ds.gene_contexts.size()))
                   .first;
      ds.cell_ids.push_back(rec.cell_id);
      ds.gene_contexts.push_back(std::move(ctx));
    }

    auto var_it = drug_variants.find(rec.drug_id);
    if (var_it == drug_variants.end()) {
      const auto strings = augment_drug(*drug_it->second, augment_n, seed);
      std::vector<Variant> variants;
      variants.reserve(strings.size());
      for (const auto& s : strings) {
        variants.push_back({s, smiles::morgan_fingerprint(smiles::parse(s))});
      }
      var_it = drug_variants.emplace(rec.drug_id, std::move(variants)).first;
    }

    ds.dedup_shortfall +=
        augment_n - static_cast<long>(var_it->second.size());
    for (const auto& v : var_it->second) {
      PairedExample ex;
      ex.drug_id = rec.drug_id;
      ex.cell_id = rec.cell_id;
      ex.smiles = v.smiles;
      ex.fp = v.fp;
      ex.cell_row = row_it->second;
      ex.ic50_norm = rec.ic50_norm;
      ds.examples.push_back(std::move(ex));
    }
  }
  return ds;
}

long count_pairs(const std::vector<SensitivityRecord>& sensitivity,
                 const std::vector<DrugRecord>& drugs,
                 const SubsetSpec& subset, int augment_n, uint64_t seed) {
  if (augment_n < 1) {
    throw common::InvalidConfig("count_pairs: augment_n must be positive");
  }
  std::map<std::string, const DrugRecord*> by_drug;
  for (const auto& d : drugs) by_drug[d.drug_id] = &d;

  const auto classified = classify(sensitivity, subset);
  std::map<std::string, long> variant_counts;
  long total = 0;
  for (const size_t i : classified.included) {
    const auto& rec = sensitivity[i];
    auto it = variant_counts.find(rec.drug_id);
    if (it == variant_counts.end()) {
      const auto drug_it = by_drug.find(rec.drug_id);
      if (drug_it == by_drug.end()) {
        throw UnresolvedId("count_pairs: unknown drug_id '" + rec.drug_id +
                           "'");
      }
      const auto strings = augment_drug(*drug_it->second, augment_n, seed);
      it = variant_counts
               .emplace(rec.drug_id, static_cast<long>(strings.size()))
               .first;
    }
    total += it->second;
  }
  return total;
}

}  // namespace paccmann::dataio
