//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "paccmann/common/rng.hpp"
#include "paccmann/netprop/netprop.hpp"

using namespace paccmann;
using namespace paccmann::netprop;

namespace {

PpiNetwork random_network(common::Rng& rng, int n, double edge_prob) {
  std::vector<std::string> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back("g" + std::to_string(i));
  std::vector<PpiEdge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform() < edge_prob) {
        edges.push_back({nodes[i], nodes[j], 0.05 + 0.95 * rng.uniform()});
      }
    }
  }
  return PpiNetwork(std::move(nodes), std::move(edges));
}

GeneWeightVector random_weights(common::Rng& rng, const PpiNetwork& net) {
  GeneWeightVector w;
  w.genes = net.nodes();
  w.values = Eigen::RowVectorXd(net.size());
  for (int i = 0; i < net.size(); ++i) w.values[i] = rng.uniform();
  return w;
}

}  // namespace

TEST_CASE("init_weights marks targets and reports absentees") {
  PpiNetwork net({"g1", "g2"}, {{"g1", "g2", 1.0}});
  PropagationConfig cfg;

  const auto r = init_weights({"g1"}, net, cfg);
  CHECK(r.weights.at("g1") == 1.0);
  CHECK(r.weights.at("g2") == 1e-5);
  CHECK(r.missing_targets.empty());

  const auto none = init_weights({}, net, cfg);
  CHECK(none.weights.at("g1") == 1e-5);
  CHECK(none.weights.at("g2") == 1e-5);

  const auto absent = init_weights({"gX"}, net, cfg);
  CHECK(absent.weights.at("g1") == 1e-5);
  CHECK(absent.missing_targets == std::vector<std::string>{"gX"});
}

TEST_CASE("normalize_adjacency matches hand-worked degrees") {
  PpiNetwork pair({"a", "b"}, {{"a", "b", 1.0}});
  Eigen::MatrixXd ap = Eigen::MatrixXd(normalize_adjacency(pair));
  CHECK(ap(0, 1) == doctest::Approx(1.0));
  CHECK(ap(1, 0) == doctest::Approx(1.0));
  CHECK(ap(0, 0) == 0.0);

  PpiNetwork tri({"a", "b", "c"},
                 {{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}});
  Eigen::MatrixXd tp = Eigen::MatrixXd(normalize_adjacency(tri));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(tp(i, j) == doctest::Approx(i == j ? 0.0 : 0.5));
    }
  }

  PpiNetwork iso({"a", "b", "c"}, {{"a", "b", 1.0}});
  Eigen::MatrixXd ip = Eigen::MatrixXd(normalize_adjacency(iso));
  CHECK(ip.row(2).isZero());
  CHECK(ip.col(2).isZero());
}

TEST_CASE("network construction enforces its invariants") {
  CHECK_THROWS(PpiNetwork({"a", "a"}, {}));                 // duplicate node
  CHECK_THROWS(PpiNetwork({"a"}, {{"a", "a", 0.5}}));       // self edge
  CHECK_THROWS(PpiNetwork({"a", "b"}, {{"a", "b", 0.0}}));  // confidence 0
  CHECK_THROWS(PpiNetwork({"a", "b"}, {{"a", "b", 1.5}}));  // confidence > 1
  CHECK_THROWS(PpiNetwork({"a"}, {{"a", "x", 0.5}}));       // unknown node

  // Duplicate edges keep the highest confidence.
  PpiNetwork dup({"a", "b"}, {{"a", "b", 0.2}, {"a", "b", 0.8}});
  Eigen::MatrixXd a = Eigen::MatrixXd(dup.adjacency());
  CHECK(a(0, 1) == 0.8);
}

TEST_CASE("propagate degenerates correctly at alpha zero") {
  common::Rng rng(3);
  const auto net = random_network(rng, 12, 0.3);
  const auto ap = normalize_adjacency(net);
  const auto w0 = random_weights(rng, net);

  PropagationConfig cfg;
  cfg.alpha = 0.0;
  const auto [w, iters] = propagate(w0, ap, cfg);
  CHECK(iters == 1);
  CHECK((w.values - w0.values).cwiseAbs().maxCoeff() == 0.0);

  const auto direct = propagate_direct(w0, ap, 0.0);
  CHECK((direct.values - w0.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("isolated nodes converge to (1-alpha) * w0") {
  PpiNetwork net({"a", "b", "c"}, {{"a", "b", 0.7}});
  const auto ap = normalize_adjacency(net);
  GeneWeightVector w0;
  w0.genes = net.nodes();
  w0.values = Eigen::RowVectorXd(3);
  w0.values << 1.0, 1e-5, 0.4;

  PropagationConfig cfg;
  cfg.alpha = 0.7;
  const auto [w, iters] = propagate(w0, ap, cfg);
  CHECK(w.at("c") == doctest::Approx(0.3 * 0.4).epsilon(1e-9));
  CHECK(iters <= cfg.max_iters);
}

TEST_CASE("single node closed form") {
  PpiNetwork net({"a"}, {});
  const auto ap = normalize_adjacency(net);
  GeneWeightVector w0;
  w0.genes = {"a"};
  w0.values = Eigen::RowVectorXd(1);
  w0.values << 0.8;
  const auto direct = propagate_direct(w0, ap, 0.7);
  CHECK(direct.values[0] == doctest::Approx(0.3 * 0.8));
}

TEST_CASE("iterative propagation agrees with the linear-solve oracle") {
  common::Rng rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    const auto net = random_network(rng, 10 + static_cast<int>(trial) * 12,
                                    trial % 2 ? 0.15 : 0.4);
    const auto ap = normalize_adjacency(net);
    const auto w0 = random_weights(rng, net);
    for (double alpha : {0.0, 0.3, 0.7, 0.99}) {
      PropagationConfig cfg;
      cfg.alpha = alpha;
      const auto [w, iters] = propagate(w0, ap, cfg);
      const auto direct = propagate_direct(w0, ap, alpha);
      const double diff = (w.values - direct.values).cwiseAbs().maxCoeff();
      CHECK_MESSAGE(diff < 1e-6, "alpha=", alpha, " diff=", diff);

      // Fixed-point residual of the returned weights.
      Eigen::RowVectorXd res =
          w.values - (alpha * (w.values * ap) + (1 - alpha) * w0.values);
      CHECK(res.cwiseAbs().maxCoeff() < cfg.tol);
    }
  }
}

TEST_CASE("propagation is linear in w0 and equivariant under permutation") {
  common::Rng rng(23);
  const auto net = random_network(rng, 20, 0.3);
  const auto ap = normalize_adjacency(net);
  const auto w0 = random_weights(rng, net);

  const auto base = propagate_direct(w0, ap, 0.7);
  GeneWeightVector scaled = w0;
  scaled.values *= 3.5;
  const auto triple = propagate_direct(scaled, ap, 0.7);
  CHECK((triple.values - 3.5 * base.values).cwiseAbs().maxCoeff() < 1e-9);

  // Permute node order and re-run; weights must follow their genes.
  std::vector<int> perm(net.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  rng.shuffle(perm);
  std::vector<std::string> pnodes(perm.size());
  for (size_t i = 0; i < perm.size(); ++i) {
    pnodes[i] = net.nodes()[perm[i]];
  }
  std::vector<PpiEdge> pedges = net.edges();
  PpiNetwork pnet(pnodes, pedges);
  GeneWeightVector pw0;
  pw0.genes = pnodes;
  pw0.values = Eigen::RowVectorXd(pnet.size());
  for (int i = 0; i < pnet.size(); ++i) pw0.values[i] = w0.at(pnodes[i]);
  const auto pbase = propagate_direct(pw0, normalize_adjacency(pnet), 0.7);
  for (int i = 0; i < pnet.size(); ++i) {
    CHECK(pbase.values[i] == doctest::Approx(base.at(pnodes[i])).epsilon(1e-9));
  }
}

TEST_CASE("select_top_genes ranks with lexicographic tie-breaks") {
  GeneWeightVector w;
  w.genes = {"g1", "g2", "g3"};
  w.values = Eigen::RowVectorXd(3);
  w.values << 0.5, 0.3, 0.1;
  CHECK(select_top_genes(w, 2).genes == std::vector<std::string>{"g1", "g2"});
  CHECK(select_top_genes(w, 20).genes ==
        std::vector<std::string>{"g1", "g2", "g3"});

  GeneWeightVector tie;
  tie.genes = {"b", "a"};
  tie.values = Eigen::RowVectorXd(2);
  tie.values << 0.5, 0.5;
  CHECK(select_top_genes(tie, 1).genes == std::vector<std::string>{"a"});
}

TEST_CASE("pool_panels unions sorted and deduplicated") {
  CHECK(pool_panels({{{"a", "b"}}, {{"b", "c"}}}).genes ==
        std::vector<std::string>{"a", "b", "c"});
  CHECK(pool_panels({}).genes.empty());

  std::vector<GenePanel> many;
  common::Rng rng(5);
  for (int d = 0; d < 208; ++d) {
    GenePanel p;
    std::set<std::string> seen;
    while (seen.size() < 20) {
      seen.insert("g" + std::to_string(rng.uniform_index(3000)));
    }
    p.genes.assign(seen.begin(), seen.end());
    many.push_back(std::move(p));
  }
  const auto pooled = pool_panels(many);
  CHECK(pooled.genes.size() <= 4160);
  CHECK(std::is_sorted(pooled.genes.begin(), pooled.genes.end()));
}
