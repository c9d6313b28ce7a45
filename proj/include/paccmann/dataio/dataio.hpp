//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "paccmann/common/error.hpp"
#include "paccmann/netprop/netprop.hpp"
#include "paccmann/smiles/fingerprint.hpp"

namespace paccmann::dataio {

struct MalformedCsv : common::InputError {
  using InputError::InputError;
};
struct DuplicateCellId : common::InputError {
  using InputError::InputError;
};
struct NonNumericValue : common::InputError {
  using InputError::InputError;
};
struct UnresolvedId : common::InputError {
  using InputError::InputError;
};
struct PanelGeneMissing : common::InputError {
  using InputError::InputError;
};
struct DegenerateRange : common::ValidationError {
  using ValidationError::ValidationError;
};
struct TooFewEntities : common::ValidationError {
  using ValidationError::ValidationError;
};

struct ExpressionProfile {
  std::string cell_id;
  std::map<std::string, double> values;
};

struct DrugRecord {
  std::string drug_id;
  std::string smiles;
  std::vector<std::string> targets;
};

struct SensitivityRecord {
  std::string drug_id;
  std::string cell_id;
  double ic50_raw = 0.0;
  double ic50_norm = -1.0;  // filled by normalize_ic50
};

// expression.csv: header `cell_id,<gene>,...`, one row per cell line.
std::vector<ExpressionProfile> load_expression(const std::string& path);

// drugs.csv: header `drug_id,smiles,targets` (targets `;`-separated) or the
// target-only form `drug_id,targets`. SMILES are parse-validated when given.
std::vector<DrugRecord> load_drugs(const std::string& path);

// sensitivity.csv: header `drug_id,cell_id,ic50`.
std::vector<SensitivityRecord> load_sensitivity(const std::string& path);

// ppi.tsv: header `gene_a<TAB>gene_b<TAB>confidence`.
netprop::PpiNetwork load_ppi(const std::string& path);

// Min-max over the full record set; returns (min, max) and fills ic50_norm.
std::pair<double, double> normalize_ic50(std::vector<SensitivityRecord>& records);

// Clamp-normalize one raw value against stored bounds (predict-time use).
double normalize_ic50_value(double raw, double lo, double hi);

struct SplitPlan {
  uint64_t seed = 0;
  std::vector<std::string> test_drugs, test_cells;
  struct Fold {
    std::vector<std::string> val_drugs, val_cells;
  };
  std::vector<Fold> folds;  // 25 blocks partitioning the 90% pool

  std::string to_json() const;
  static SplitPlan from_json(const std::string& text);
};

// 10% (round half-up) of each entity list becomes the test set; the rest is
// shuffled and cut into 25 near-equal validation blocks.
SplitPlan make_split(const std::vector<std::string>& drug_ids,
                     const std::vector<std::string>& cell_ids, uint64_t seed);

struct SubsetSpec {
  std::set<std::string> drugs, cells;
};

SubsetSpec test_subset(const SplitPlan& plan);
SubsetSpec val_subset(const SplitPlan& plan, int fold);
// Pool minus the fold's validation block (the pool is the union of all
// fold blocks).
SubsetSpec train_subset(const SplitPlan& plan, int fold);

struct PairedExample {
  std::string drug_id, cell_id;
  std::string smiles;  // augmented variant
  smiles::Fingerprint fp;
  int cell_row = -1;  // row in PairedDataset::gene_contexts
  double ic50_norm = 0.0;
};

struct PairedDataset {
  std::vector<PairedExample> examples;
  std::vector<std::string> cell_ids;               // row -> cell line id
  std::vector<std::vector<double>> gene_contexts;  // row -> panel order
  std::vector<std::string> panel_genes;
  long dropped_records = 0;   // records straddling the subset boundary
  long dedup_shortfall = 0;   // augment_n * included - materialized
};

// Expands each sensitivity record whose drug AND cell lie in the subset into
// one tuple per augmented SMILES variant. Records with exactly one side in
// the subset are dropped and counted; records fully outside are ignored.
PairedDataset build_pairs(const std::vector<SensitivityRecord>& sensitivity,
                          const std::vector<DrugRecord>& drugs,
                          const std::vector<ExpressionProfile>& expressions,
                          const netprop::GenePanel& panel,
                          const SubsetSpec& subset, int augment_n = 32,
                          uint64_t seed = 0);

// Tuple count of build_pairs without materializing tuples: augments each
// included drug once to learn its variant count.
long count_pairs(const std::vector<SensitivityRecord>& sensitivity,
                 const std::vector<DrugRecord>& drugs,
                 const SubsetSpec& subset, int augment_n = 32,
                 uint64_t seed = 0);

}  // namespace paccmann::dataio
