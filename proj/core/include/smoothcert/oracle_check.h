// Copyright 2026 The smoothcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SMOOTHCERT_ORACLE_CHECK_H_
#define SMOOTHCERT_ORACLE_CHECK_H_

#include <cstdint>
#include <string>
#include <vector>

namespace smoothcert {

struct OracleCheckOptions {
  std::uint64_t seed = 17;
  // Named checks to run; must be non-empty. "all" expands to every check.
  std::vector<std::string> checks = {"all"};
  // Negative control: perturbs the ledger replay's cost constant so the
  // filter_ledger check must fail.
  bool inject_fault = false;
};

struct OracleCheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;  // inputs and deltas on failure, stats on success
};

const std::vector<std::string>& oracle_check_names();

// Runs the selected battery: analytic GMM denoiser vs the MC oracle,
// Clopper-Pearson vs the exact binomial bisection, phi_inv vs bisection, the
// filter ledger invariants on randomized schedules, the two denoising-step
// forms, and the fixed-variance composition cross-check.
std::vector<OracleCheckOutcome> run_oracle_checks(
    const OracleCheckOptions& options);

// Randomized privacy-filter soundness simulation, shared with the acceptance
// suite. Each run draws a random schedule (T <= 50), per-step requested
// scales, and per-pixel noise stds (including exact zeros), then drives
// privacy_filter with the largest-feasible-scale fallback at exhaustion.
// cost_recompute_fudge scales the independent cost recomputation; 1.0 is the
// honest replay.
struct FilterSimStats {
  int runs = 0;
  long long accepted_spends = 0;
  int budget_violations = 0;       // per-pixel spent total > mu^2 + 1e-12
  int post_exhaustion_spends = 0;  // any accepted spend after exhaustion
  int cost_mismatches = 0;         // ledger entry != independent recompute
  double max_budget_excess = 0.0;  // max over runs of (total - mu^2)
};

FilterSimStats simulate_filter_runs(int runs, std::uint64_t seed,
                                    double cost_recompute_fudge = 1.0);

}  // namespace smoothcert

#endif  // SMOOTHCERT_ORACLE_CHECK_H_
