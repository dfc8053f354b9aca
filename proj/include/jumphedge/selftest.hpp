#pragma once

#include <string>
#include <vector>

namespace jumphedge {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick invariant suite (a few seconds): pricing identities, G/Lambda,
/// the Gamma normalization, martingale drift, serial/parallel agreement,
/// ledger replay, quantile monotonicity.
std::vector<CheckResult> run_selftest(int workers = 0);

}  // namespace jumphedge
