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

#include "smoothcert/privacy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "smoothcert/stats.h"

namespace smoothcert {

double BudgetVector::min_lambda() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : lambda) {
    m = std::min(m, v);
  }
  return m;
}

BudgetVector make_budget(double sigma, int dim) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  if (dim < 1) {
    throw std::invalid_argument("dimension must be >= 1");
  }
  BudgetVector budget;
  budget.mu_total = 1.0 / sigma;
  budget.lambda.assign(dim, budget.mu_total * budget.mu_total);
  return budget;
}

double guidance_cost_coeff(const NoiseSchedule& schedule, int t) {
  const double one_minus_bar = 1.0 - schedule.alpha_bar(t);
  const double beta = schedule.beta(t);  // 1 - alpha_t
  return schedule.alpha_bar(t - 1) * beta * beta /
         (one_minus_bar * one_minus_bar);
}

void step_cost(double s, int t, const NoiseSchedule& schedule,
               std::span<const double> sigma_diag,
               std::span<double> cost_out) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("guidance scale must lie in [0, 1]");
  }
  if (sigma_diag.size() != cost_out.size()) {
    throw std::invalid_argument("step_cost: dimension mismatch");
  }
  if (s == 0.0) {
    std::fill(cost_out.begin(), cost_out.end(), 0.0);
    return;
  }
  const double s2c = s * s * guidance_cost_coeff(schedule, t);
  for (std::size_t i = 0; i < sigma_diag.size(); ++i) {
    if (sigma_diag[i] < 0.0) {
      throw std::invalid_argument("sigma_diag entries must be >= 0");
    }
    cost_out[i] = s2c / (sigma_diag[i] * sigma_diag[i]);
  }
}

std::vector<double> step_cost(double s, int t, const NoiseSchedule& schedule,
                              std::span<const double> sigma_diag) {
  std::vector<double> cost(sigma_diag.size());
  step_cost(s, t, schedule, sigma_diag, cost);
  return cost;
}

FilterVerdict privacy_filter(BudgetVector& budget, double s, int t,
                             const NoiseSchedule& schedule,
                             std::span<const double> sigma_diag,
                             std::span<double> cost_out) {
  if (budget.lambda.size() != sigma_diag.size()) {
    throw std::invalid_argument("privacy_filter: dimension mismatch");
  }
  step_cost(s, t, schedule, sigma_diag, cost_out);
  for (std::size_t i = 0; i < cost_out.size(); ++i) {
    if (!(budget.lambda[i] - cost_out[i] > 0.0)) {
      return FilterVerdict::kNo;
    }
  }
  for (std::size_t i = 0; i < cost_out.size(); ++i) {
    budget.lambda[i] -= cost_out[i];
  }
  return FilterVerdict::kOk;
}

FilterVerdict privacy_filter(BudgetVector& budget, double s, int t,
                             const NoiseSchedule& schedule,
                             std::span<const double> sigma_diag) {
  std::vector<double> cost(sigma_diag.size());
  return privacy_filter(budget, s, t, schedule, sigma_diag, cost);
}

double max_feasible_scale(const BudgetVector& budget, int t,
                          const NoiseSchedule& schedule,
                          std::span<const double> sigma_diag, double s_cap) {
  if (budget.lambda.size() != sigma_diag.size()) {
    throw std::invalid_argument("max_feasible_scale: dimension mismatch");
  }
  const double c_t = guidance_cost_coeff(schedule, t);
  double scale = s_cap;
  for (std::size_t i = 0; i < sigma_diag.size(); ++i) {
    const double s_i = sigma_diag[i] * std::sqrt(budget.lambda[i] / c_t);
    scale = std::min(scale, s_i);
  }
  return std::max(scale, 0.0);
}

void spend_remaining(BudgetVector& budget, double s, int t,
                     const NoiseSchedule& schedule,
                     std::span<const double> sigma_diag,
                     std::span<double> cost_out) {
  step_cost(s, t, schedule, sigma_diag, cost_out);
  for (std::size_t i = 0; i < cost_out.size(); ++i) {
    const double remaining = budget.lambda[i] - cost_out[i];
    // The binding pixel lands on zero up to the subtraction's rounding;
    // forfeit that dust so the budget reads exactly exhausted.
    budget.lambda[i] =
        remaining <= 1e-12 * cost_out[i] ? 0.0 : remaining;
  }
}

double ars_fixed_radius(std::span<const double> sigmas, double p_plus_lb,
                        double p_minus_ub) {
  if (sigmas.empty()) {
    throw std::invalid_argument("ars_fixed_radius needs at least one step");
  }
  if (!(p_plus_lb >= 0.0 && p_plus_lb <= 1.0 && p_minus_ub >= 0.0 &&
        p_minus_ub <= 1.0 && p_minus_ub <= p_plus_lb)) {
    throw std::invalid_argument(
        "need 0 <= p_minus_ub <= p_plus_lb <= 1");
  }
  double inv_var_sum = 0.0;
  for (double sigma : sigmas) {
    if (!(sigma > 0.0)) {
      throw std::invalid_argument("per-step sigmas must be positive");
    }
    inv_var_sum += 1.0 / (sigma * sigma);
  }
  const double p_plus = std::clamp(p_plus_lb, 1e-12, 1.0 - 1e-12);
  const double p_minus = std::clamp(p_minus_ub, 1e-12, 1.0 - 1e-12);
  return (phi_inv(p_plus) - phi_inv(p_minus)) / (2.0 * std::sqrt(inv_var_sum));
}

}  // namespace smoothcert
