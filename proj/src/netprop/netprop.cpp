//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include "paccmann/netprop/netprop.hpp"

#include <algorithm>
#include <cmath>

namespace paccmann::netprop {

PpiNetwork::PpiNetwork(std::vector<std::string> nodes,
                       std::vector<PpiEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i], static_cast<int>(i)).second) {
      throw common::ValidationError("duplicate network node: " + nodes_[i]);
    }
  }
  std::map<std::pair<int, int>, double> weight;
  for (const auto& e : edges_) {
    const int ia = index_of(e.a);
    const int ib = index_of(e.b);
    if (ia < 0 || ib < 0) {
      throw common::ValidationError("edge references unknown node: " + e.a +
                                    " - " + e.b);
    }
    if (ia == ib) {
      throw common::ValidationError("self edge on node: " + e.a);
    }
    if (!(e.confidence > 0.0) || e.confidence > 1.0) {
      throw common::ValidationError("edge confidence outside (0,1]: " + e.a +
                                    " - " + e.b);
    }
    auto key = std::minmax(ia, ib);
    auto [it, inserted] = weight.emplace(key, e.confidence);
    if (!inserted) it->second = std::max(it->second, e.confidence);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * weight.size());
  for (const auto& [key, w] : weight) {
    triplets.emplace_back(key.first, key.second, w);
    triplets.emplace_back(key.second, key.first, w);
  }
  adjacency_.resize(size(), size());
  adjacency_.setFromTriplets(triplets.begin(), triplets.end());
}

int PpiNetwork::index_of(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? -1 : it->second;
}

double GeneWeightVector::at(const std::string& symbol) const {
  for (size_t i = 0; i < genes.size(); ++i) {
    if (genes[i] == symbol) return values[static_cast<Eigen::Index>(i)];
  }
  throw common::Error("gene not in weight vector: " + symbol);
}

InitWeights init_weights(const std::set<std::string>& targets,
                         const PpiNetwork& net, const PropagationConfig& cfg) {
  InitWeights out;
  out.weights.genes = net.nodes();
  out.weights.values =
      Eigen::RowVectorXd::Constant(net.size(), cfg.epsilon_weight);
  for (const auto& t : targets) {
    const int i = net.index_of(t);
    if (i < 0) {
      out.missing_targets.push_back(t);
    } else {
      out.weights.values[i] = cfg.target_weight;
    }
  }
  return out;
}

Eigen::SparseMatrix<double> normalize_adjacency(const PpiNetwork& net) {
  const auto& a = net.adjacency();
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(net.size());
  for (int k = 0; k < a.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
      degree[it.row()] += it.value();
    }
  }
  Eigen::VectorXd inv_sqrt(net.size());
  for (int i = 0; i < net.size(); ++i) {
    inv_sqrt[i] = degree[i] > 0.0 ? 1.0 / std::sqrt(degree[i]) : 0.0;
  }
  Eigen::SparseMatrix<double> out(net.size(), net.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(a.nonZeros());
  for (int k = 0; k < a.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
      triplets.emplace_back(it.row(), it.col(),
                            it.value() * inv_sqrt[it.row()] *
                                inv_sqrt[it.col()]);
    }
  }
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

PropagationResult propagate(const GeneWeightVector& w0,
                            const Eigen::SparseMatrix<double>& aprime,
                            const PropagationConfig& cfg) {
  if (w0.values.size() != aprime.rows()) {
    throw common::Error("weight vector does not match adjacency dimension");
  }
  PropagationResult out;
  out.weights.genes = w0.genes;
  Eigen::RowVectorXd w = w0.values;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    Eigen::RowVectorXd next =
        cfg.alpha * (w * aprime) + (1.0 - cfg.alpha) * w0.values;
    const double diff = (next - w).cwiseAbs().maxCoeff();
    w = std::move(next);
    if (diff < cfg.tol) {
      out.weights.values = std::move(w);
      out.iterations = iter;
      return out;
    }
  }
  throw NoConvergence("propagation did not converge in " +
                      std::to_string(cfg.max_iters) + " iterations");
}

GeneWeightVector propagate_direct(const GeneWeightVector& w0,
                                  const Eigen::SparseMatrix<double>& aprime,
                                  double alpha) {
  if (w0.values.size() != aprime.rows()) {
    throw common::Error("weight vector does not match adjacency dimension");
  }
  const Eigen::Index n = aprime.rows();
  Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n, n) - alpha * Eigen::MatrixXd(aprime);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system.transpose());
  if (!lu.isInvertible()) {
    throw SingularSystem("I - alpha * A' is singular");
  }
  GeneWeightVector out;
  out.genes = w0.genes;
  out.values = lu.solve((1.0 - alpha) * w0.values.transpose()).transpose();
  return out;
}

GenePanel select_top_genes(const GeneWeightVector& w, int k) {
  if (k < 1) throw common::Error("select_top_genes: k must be positive");
  std::vector<int> order(w.genes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (w.values[a] != w.values[b]) return w.values[a] > w.values[b];
    return w.genes[a] < w.genes[b];
  });
  const size_t take = std::min<size_t>(order.size(), static_cast<size_t>(k));
  GenePanel panel;
  panel.genes.reserve(take);
  for (size_t i = 0; i < take; ++i) panel.genes.push_back(w.genes[order[i]]);
  std::sort(panel.genes.begin(), panel.genes.end());
  return panel;
}

GenePanel pool_panels(const std::vector<GenePanel>& panels) {
  std::set<std::string> pooled;
  for (const auto& p : panels) pooled.insert(p.genes.begin(), p.genes.end());
  return GenePanel{std::vector<std::string>(pooled.begin(), pooled.end())};
}

}  // namespace paccmann::netprop
