//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include "paccmann/model/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace paccmann::model {

Metrics evaluate(const std::vector<double>& predictions,
                 const std::vector<double>& targets) {
  if (predictions.empty() || predictions.size() != targets.size())
    throw LengthMismatch("evaluate: need equal non-zero lengths");
  const long n = static_cast<long>(predictions.size());
  double se = 0.0, mean_p = 0.0, mean_t = 0.0;
  for (long i = 0; i < n; ++i) {
    const double d = predictions[i] - targets[i];
    se += d * d;
    mean_p += predictions[i];
    mean_t += targets[i];
  }
  mean_p /= n;
  mean_t /= n;
  double cov = 0.0, var_p = 0.0, var_t = 0.0;
  for (long i = 0; i < n; ++i) {
    const double dp = predictions[i] - mean_p;
    const double dt = targets[i] - mean_t;
    cov += dp * dt;
    var_p += dp * dp;
    var_t += dt * dt;
  }
  if (var_p == 0.0 || var_t == 0.0)
    throw ConstantVector("evaluate: pearson undefined for a constant vector");
  Metrics m;
  m.rmse = std::sqrt(se / n);
  m.pearson = cov / std::sqrt(var_p * var_t);
  m.n = n;
  return m;
}

Alternative alternative_from(const std::string& name) {
  if (name == "a<b" || name == "less") return Alternative::kLess;
  if (name == "a>b" || name == "greater") return Alternative::kGreater;
  throw common::InvalidConfig("unknown alternative: " + name);
}

namespace {

// Pairwise U for sample a: 1 per a > b pair, 0.5 per tie. Equivalent to the
// midrank rank-sum form, convenient for enumeration.
double u_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) {
      if (x > y)
        u += 1.0;
      else if (x == y)
        u += 0.5;
    }
  return u;
}

double exact_p(const std::vector<double>& a, const std::vector<double>& b,
               double u_obs, Alternative alt) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const int total = static_cast<int>(pooled.size());
  const int na = static_cast<int>(a.size());
  std::vector<int> pick(na);
  for (int i = 0; i < na; ++i) pick[i] = i;
  long hits = 0, count = 0;
  std::vector<double> ga(na), gb(total - na);
  while (true) {
    ga.clear();
    gb.clear();
    int next = 0;
    for (int i = 0; i < total; ++i) {
      if (next < na && pick[next] == i) {
        ga.push_back(pooled[i]);
        ++next;
      } else {
        gb.push_back(pooled[i]);
      }
    }
    const double u = u_statistic(ga, gb);
    ++count;
    if (alt == Alternative::kLess ? u <= u_obs + 1e-9 : u >= u_obs - 1e-9)
      ++hits;
    // advance the lexicographically next na-subset of {0..total-1}
    int i = na - 1;
    while (i >= 0 && pick[i] == total - na + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < na; ++j) pick[j] = pick[j - 1] + 1;
  }
  return static_cast<double>(hits) / static_cast<double>(count);
}

double normal_p(const std::vector<double>& a, const std::vector<double>& b,
                double u_obs, Alternative alt) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;
  std::map<double, long> ties;
  for (double x : a) ++ties[x];
  for (double x : b) ++ties[x];
  double tie_sum = 0.0;
  for (const auto& [value, t] : ties) {
    (void)value;
    tie_sum += static_cast<double>(t) * t * t - t;
  }
  const double mean = na * nb / 2.0;
  const double var =
      na * nb / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
  if (var <= 0.0) return 1.0;  // all pooled values tied
  const double sd = std::sqrt(var);
  if (alt == Alternative::kLess) {
    const double z = (u_obs - mean + 0.5) / sd;
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
  }
  const double z = (u_obs - mean - 0.5) / sd;
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b,
                                 Alternative alternative,
                                 bool force_normal) {
  if (a.empty() || b.empty())
    throw EmptySample("mann_whitney_u: both samples must be non-empty");
  MannWhitneyResult r;
  r.u = u_statistic(a, b);
  r.exact = !force_normal && std::max(a.size(), b.size()) <= 8;
  r.p = r.exact ? exact_p(a, b, r.u, alternative)
                : normal_p(a, b, r.u, alternative);
  return r;
}

}  // namespace paccmann::model
