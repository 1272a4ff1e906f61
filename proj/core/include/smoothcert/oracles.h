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

#ifndef SMOOTHCERT_ORACLES_H_
#define SMOOTHCERT_ORACLES_H_

#include <cstdint>
#include <span>
#include <vector>

#include "smoothcert/gmm.h"

namespace smoothcert {

// Verification routes kept deliberately independent of the primary
// implementations they check: plain bisection instead of refined rational
// approximations, direct tail sums instead of the incomplete beta, and
// importance sampling instead of the analytic posterior mean.

// Normal quantile by bisection on the erfc-based CDF; ~1e-14 absolute.
double phi_inv_bisect(double p);

// P[Bin(n, p) >= k] by log-space summation of the exact pmf.
double binomial_tail_geq(int k, int n, double p);

// Clopper-Pearson lower bound by bisection directly on binomial_tail_geq.
double clopper_pearson_lower_bisect(int k, int n, double alpha);

// alpha_bar_t = prod_{s<=t} (1 - beta_s) accumulated in extended precision.
long double alpha_bar_product_oracle(std::span<const double> betas, int t);

struct McEstimate {
  std::vector<double> estimate;
  std::vector<double> std_error;  // self-normalized IS standard error
};

// Self-normalized importance estimate of E[x0 | x_t] under the forward model
// x_t = sqrt(ab) x0 + sqrt(1 - ab) eps, x0 ~ gmm: draws come from the prior,
// weights from the Gaussian likelihood. Requires n_samples >= 1000. Throws
// "oracle ill-conditioned" when every weight underflows.
McEstimate mc_posterior_mean_oracle(const GmmModel& gmm,
                                    std::span<const double> x_t,
                                    double alpha_bar, int n_samples,
                                    std::uint64_t seed);

}  // namespace smoothcert

#endif  // SMOOTHCERT_ORACLES_H_
