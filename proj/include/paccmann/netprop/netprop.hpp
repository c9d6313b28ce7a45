//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "paccmann/common/error.hpp"

namespace paccmann::netprop {

struct NoConvergence : common::Error {
  using Error::Error;
};
struct SingularSystem : common::Error {
  using Error::Error;
};

struct PpiEdge {
  std::string a;
  std::string b;
  double confidence;
};

// Undirected protein-protein interaction network with confidence-weighted
// edges. Node order is fixed by construction and defines the weight-vector
// layout everywhere else in this module.
class PpiNetwork {
 public:
  // Duplicate edges keep the highest confidence; self edges are rejected.
  PpiNetwork(std::vector<std::string> nodes, std::vector<PpiEdge> edges);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<PpiEdge>& edges() const { return edges_; }
  const Eigen::SparseMatrix<double>& adjacency() const { return adjacency_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  // -1 when the symbol is not a node.
  int index_of(const std::string& symbol) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<PpiEdge> edges_;
  Eigen::SparseMatrix<double> adjacency_;
  std::map<std::string, int> index_;
};

struct PropagationConfig {
  double alpha = 0.7;
  double tol = 1e-6;
  int max_iters = 10000;
  double target_weight = 1.0;
  double epsilon_weight = 1e-5;
};

// Row vector of per-gene weights laid out in network node order.
struct GeneWeightVector {
  std::vector<std::string> genes;
  Eigen::RowVectorXd values;

  double at(const std::string& symbol) const;
};

struct GenePanel {
  std::vector<std::string> genes;  // sorted, deduplicated
};

struct InitWeights {
  GeneWeightVector weights;
  std::vector<std::string> missing_targets;  // sorted
};

// Target genes get cfg.target_weight, everything else cfg.epsilon_weight.
// Targets absent from the network are returned, never silently dropped.
InitWeights init_weights(const std::set<std::string>& targets,
                         const PpiNetwork& net, const PropagationConfig& cfg);

// Symmetric normalization A' = D^{-1/2} A D^{-1/2}; rows and columns of
// degree-zero nodes stay all-zero.
Eigen::SparseMatrix<double> normalize_adjacency(const PpiNetwork& net);

struct PropagationResult {
  GeneWeightVector weights;
  int iterations;
};

// Iterates W <- alpha * W * Aprime + (1 - alpha) * W0 until the infinity
// norm of successive differences drops below cfg.tol.
PropagationResult propagate(const GeneWeightVector& w0,
                            const Eigen::SparseMatrix<double>& aprime,
                            const PropagationConfig& cfg);

// Closed-form fixed point W = (1 - alpha) * W0 * (I - alpha * Aprime)^-1 by
// dense solve; the verification oracle for propagate.
GeneWeightVector propagate_direct(const GeneWeightVector& w0,
                                  const Eigen::SparseMatrix<double>& aprime,
                                  double alpha);

// The k highest-weighted genes, ties broken by symbol; panel output is
// sorted lexicographically.
GenePanel select_top_genes(const GeneWeightVector& w, int k = 20);

// Sorted deduplicated union.
GenePanel pool_panels(const std::vector<GenePanel>& panels);

}  // namespace paccmann::netprop
