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

#ifndef SMOOTHCERT_PRIVACY_H_
#define SMOOTHCERT_PRIVACY_H_

#include <span>
#include <vector>

#include "smoothcert/schedule.h"

namespace smoothcert {

// Remaining per-pixel guidance budget. Units are squared GDP per unit attack
// radius: lambda_i starts at mu^2 = 1/sigma^2 and only decreases. A budget is
// owned by a single sampling run.
struct BudgetVector {
  std::vector<double> lambda;
  double mu_total = 0.0;  // 1 / sigma

  double min_lambda() const;
};

// Fresh budget for RS noise std sigma: mu = 1/sigma, lambda = mu^2 per pixel.
BudgetVector make_budget(double sigma, int dim);

// Audit entry for one accepted guidance spend.
struct SpendRecord {
  int t = 0;
  double scale_used = 0.0;
  std::vector<double> cost;    // per-pixel decrement, >= 0
  double min_remaining = 0.0;  // min over pixels after the spend
};

// Budget coefficient c_t = alpha_bar_{t-1} (1 - alpha_t)^2 / (1 - alpha_bar_t)^2.
double guidance_cost_coeff(const NoiseSchedule& schedule, int t);

// Per-pixel cost of one guidance step at scale s:
//   cost_i = s^2 * c_t / sigma_{t,i}^2.
// s == 0 costs exactly zero even at sigma == 0; sigma == 0 with s > 0 yields
// +inf (guidance is impossible at a noiseless step). Infinite cost is a
// value, not an error.
void step_cost(double s, int t, const NoiseSchedule& schedule,
               std::span<const double> sigma_diag, std::span<double> cost_out);
std::vector<double> step_cost(double s, int t, const NoiseSchedule& schedule,
                              std::span<const double> sigma_diag);

enum class FilterVerdict { kOk, kNo };

// GDP privacy filter: subtracts the step cost elementwise. If ANY pixel would
// reach <= 0 the budget is left untouched and the verdict is kNo; otherwise
// the spend is committed. cost_out receives the step cost either way.
FilterVerdict privacy_filter(BudgetVector& budget, double s, int t,
                             const NoiseSchedule& schedule,
                             std::span<const double> sigma_diag,
                             std::span<double> cost_out);
FilterVerdict privacy_filter(BudgetVector& budget, double s, int t,
                             const NoiseSchedule& schedule,
                             std::span<const double> sigma_diag);

// Largest scale whose step cost fits in every pixel's remaining budget,
// capped at s_cap: min_i sigma_{t,i} sqrt(lambda_i / c_t). Spending at the
// uncapped value drives the tightest pixel to exactly zero.
double max_feasible_scale(const BudgetVector& budget, int t,
                          const NoiseSchedule& schedule,
                          std::span<const double> sigma_diag, double s_cap);

// Deliberate final spend used by the fallback path: subtracts the cost at
// scale s without the filter's rejection rule, clamping pixels at zero.
// Returns the cost in cost_out.
void spend_remaining(BudgetVector& budget, double s, int t,
                     const NoiseSchedule& schedule,
                     std::span<const double> sigma_diag,
                     std::span<double> cost_out);

// Fixed-variance adaptive-composition radius:
//   r = (phi_inv(p_plus) - phi_inv(p_minus)) / (2 sqrt(sum 1/sigma_i^2)).
// Reference formula for cross-checking the filter accounting.
double ars_fixed_radius(std::span<const double> sigmas, double p_plus_lb,
                        double p_minus_ub);

}  // namespace smoothcert

#endif  // SMOOTHCERT_PRIVACY_H_
