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

#ifndef SMOOTHCERT_STATS_H_
#define SMOOTHCERT_STATS_H_

namespace smoothcert {

// Standard normal CDF via erfc; accurate in both tails.
double normal_cdf(double x);

// Standard normal quantile for p in (0, 1). Rational initial guess refined by
// Newton corrections against normal_cdf; absolute error <= 1e-9 over
// [1e-12, 1 - 1e-12].
double phi_inv(double p);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double reg_incomplete_beta(double a, double b, double x);

// Exact one-sided lower confidence bound for a binomial proportion: the
// largest p with P[Bin(n, p) >= k] <= alpha, via bisection on
// I_p(k, n - k + 1). Returns 0 for k = 0.
double clopper_pearson_lower(int k, int n, double alpha);

// Two-sided exact binomial test of k successes out of m fair-coin trials:
// min(1, 2 * min(P[X <= k], P[X >= k])). Tails summed in log space; valid for
// m up to 1e5.
double binomial_two_sided_pvalue(int k, int m);

}  // namespace smoothcert

#endif  // SMOOTHCERT_STATS_H_
