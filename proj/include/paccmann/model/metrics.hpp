//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>
#include <vector>

#include "paccmann/common/error.hpp"

namespace paccmann::model {

struct LengthMismatch : common::Error {
  using Error::Error;
};
struct ConstantVector : common::Error {
  using Error::Error;
};
struct EmptySample : common::Error {
  using Error::Error;
};

struct Metrics {
  double rmse = 0.0;
  double pearson = 0.0;
  long n = 0;
};

Metrics evaluate(const std::vector<double>& predictions,
                 const std::vector<double>& targets);

enum class Alternative { kLess, kGreater };  // "a<b" / "a>b"

Alternative alternative_from(const std::string& name);

struct MannWhitneyResult {
  double u = 0.0;  // U statistic for sample a, midrank ties
  double p = 0.0;  // one-sided
  bool exact = false;
};

// Exact permutation enumeration when max(|a|,|b|) <= 8; otherwise normal
// approximation with tie and continuity corrections. force_normal skips the
// exact path so the two can be cross-checked on small samples.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b,
                                 Alternative alternative,
                                 bool force_normal = false);

}  // namespace paccmann::model
