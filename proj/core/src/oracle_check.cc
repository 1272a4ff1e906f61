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

#include "smoothcert/oracle_check.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "smoothcert/certify.h"
#include "smoothcert/oracles.h"
#include "smoothcert/privacy.h"
#include "smoothcert/rng.h"
#include "smoothcert/sampler.h"
#include "smoothcert/schedule.h"
#include "smoothcert/stats.h"

namespace smoothcert {

namespace {

std::string format_delta(const char* what, double got, double want) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s: got %.17g want %.17g (delta %.3g)",
                what, got, want, got - want);
  return buf;
}

NoiseSchedule random_schedule(Rng& rng, int max_steps) {
  const int T = 1 + static_cast<int>(rng.next_double() * max_steps);
  std::vector<double> betas(T);
  for (double& b : betas) {
    b = 1e-4 + rng.next_double() * 0.97;
  }
  std::sort(betas.begin(), betas.end());
  return NoiseSchedule(std::move(betas));
}

OracleCheckOutcome check_denoiser_mc(std::uint64_t seed) {
  OracleCheckOutcome outcome{"denoiser_mc", true, ""};
  Rng rng = Rng::substream(seed, {0x9111ULL});
  const int cases = 50;
  const int samples = 100000;
  int failures = 0;
  std::ostringstream detail;
  for (int c = 0; c < cases; ++c) {
    const int K = 1 + static_cast<int>(rng.next_double() * 3);
    const int d = 1 + static_cast<int>(rng.next_double() * 3);
    GmmModel gmm;
    gmm.weights.resize(K);
    double total = 0.0;
    for (double& w : gmm.weights) {
      w = 0.2 + rng.next_double();
      total += w;
    }
    for (double& w : gmm.weights) w /= total;
    gmm.means.resize(K);
    gmm.scales.resize(K);
    gmm.labels.resize(K);
    for (int k = 0; k < K; ++k) {
      gmm.means[k].resize(d);
      rng.fill_gaussian(gmm.means[k]);
      for (double& v : gmm.means[k]) v *= 2.0;
      gmm.scales[k] = 0.4 + rng.next_double();
      gmm.labels[k] = k;
    }
    const double alpha_bar = 0.05 + 0.9 * rng.next_double();
    std::vector<double> x_t(d);
    rng.fill_gaussian(x_t);
    const std::vector<double> analytic =
        gmm_posterior_mean(gmm, x_t, alpha_bar);
    const McEstimate mc = mc_posterior_mean_oracle(
        gmm, x_t, alpha_bar, samples, substream_seed(seed, {0x9112ULL, (std::uint64_t)c}));
    bool case_failed = false;
    for (int i = 0; i < d; ++i) {
      const double tol = 3.0 * std::max(mc.std_error[i], 1e-12);
      if (std::fabs(analytic[i] - mc.estimate[i]) > tol) {
        case_failed = true;
        if (failures < 3) {
          detail << "case " << c << " coord " << i << ": "
                 << format_delta("analytic vs mc", analytic[i],
                                 mc.estimate[i])
                 << " se " << mc.std_error[i] << "\n";
        }
      }
    }
    failures += case_failed ? 1 : 0;
  }
  if (failures > 1) {  // one 3-sigma fluke allowed across the battery
    outcome.passed = false;
    outcome.detail = std::to_string(failures) + " of " +
                     std::to_string(cases) + " cases outside 3 standard "
                     "errors\n" + detail.str();
  } else {
    outcome.detail = std::to_string(cases) + " cases within 3 standard errors";
  }
  return outcome;
}

OracleCheckOutcome check_clopper_pearson(std::uint64_t /*seed*/) {
  OracleCheckOutcome outcome{"clopper_pearson", true, ""};
  for (double alpha : {0.05, 0.001}) {
    for (int n = 1; n <= 30; ++n) {
      for (int k = 0; k <= n; ++k) {
        const double primary = clopper_pearson_lower(k, n, alpha);
        const double oracle = clopper_pearson_lower_bisect(k, n, alpha);
        if (std::fabs(primary - oracle) > 1e-9) {
          outcome.passed = false;
          outcome.detail += "k=" + std::to_string(k) + " n=" +
                            std::to_string(n) + " alpha=" +
                            std::to_string(alpha) + " " +
                            format_delta("cp", primary, oracle) + "\n";
          if (outcome.detail.size() > 1000) return outcome;
        }
      }
    }
  }
  const double closed_form = std::pow(0.001, 1.0 / 1000.0);
  const double primary = clopper_pearson_lower(1000, 1000, 0.001);
  if (std::fabs(primary - closed_form) > 1e-9) {
    outcome.passed = false;
    outcome.detail += format_delta("k=n closed form", primary, closed_form);
  }
  if (outcome.passed) {
    outcome.detail = "all (k, n <= 30) x {0.05, 0.001} within 1e-9; "
                     "k=n closed form reproduced";
  }
  return outcome;
}

OracleCheckOutcome check_phi_inv(std::uint64_t seed) {
  OracleCheckOutcome outcome{"phi_inv", true, ""};
  Rng rng = Rng::substream(seed, {0x9211ULL});
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    double p;
    if (i % 3 == 0) {
      // log-spaced tail probe, alternating sides
      const double mag = std::pow(10.0, -12.0 * rng.next_double());
      p = (i % 2 == 0) ? mag : 1.0 - mag;
      p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    } else {
      p = 1e-12 + (1.0 - 2e-12) * rng.next_double();
    }
    const double primary = phi_inv(p);
    const double oracle = phi_inv_bisect(p);
    ++checked;
    if (std::fabs(primary - oracle) > 1e-9) {
      char p_buf[32];
      std::snprintf(p_buf, sizeof(p_buf), "%.17g", p);
      outcome.passed = false;
      outcome.detail += std::string("p=") + p_buf + " " +
                        format_delta("phi_inv", primary, oracle) + "\n";
      if (outcome.detail.size() > 1000) return outcome;
    }
  }
  if (outcome.passed) {
    outcome.detail =
        std::to_string(checked) + " probe points within 1e-9 of bisection";
  }
  return outcome;
}

OracleCheckOutcome check_filter_ledger(std::uint64_t seed, bool inject_fault) {
  OracleCheckOutcome outcome{"filter_ledger", true, ""};
  const double fudge = inject_fault ? 1.02 : 1.0;
  const FilterSimStats stats = simulate_filter_runs(500, seed, fudge);
  std::ostringstream detail;
  detail << stats.runs << " runs, " << stats.accepted_spends
         << " accepted spends, max budget excess " << stats.max_budget_excess;
  if (stats.budget_violations > 0 || stats.post_exhaustion_spends > 0 ||
      stats.cost_mismatches > 0) {
    outcome.passed = false;
    detail << "; budget_violations=" << stats.budget_violations
           << " post_exhaustion_spends=" << stats.post_exhaustion_spends
           << " cost_mismatches=" << stats.cost_mismatches;
  }
  outcome.detail = detail.str();
  return outcome;
}

OracleCheckOutcome check_step_identity(std::uint64_t seed) {
  OracleCheckOutcome outcome{"step_identity", true, ""};
  Rng rng = Rng::substream(seed, {0x9311ULL});
  for (int c = 0; c < 1000 && outcome.passed; ++c) {
    NoiseSchedule schedule = random_schedule(rng, 10);
    const int t = 1 + static_cast<int>(rng.next_double() * schedule.steps());
    const int d = 1 + static_cast<int>(rng.next_double() * 4);
    std::vector<double> x_t(d), eps(d), x0(d), out_a(d), out_b(d), sigma(d);
    rng.fill_gaussian(x_t);
    rng.fill_gaussian(eps);
    for (double& s : sigma) s = rng.next_double();
    const double ab = schedule.alpha_bar(t);
    if (1.0 - ab < 1e-12) continue;
    x0_from_eps(x_t, eps, ab, x0);
    const std::uint64_t step_seed = rng.next_u64();
    Rng rng_a(step_seed), rng_b(step_seed);
    ddpm_step_eps_form(x_t, eps, t, schedule, sigma, rng_a, out_a);
    ddpm_step(x_t, x0, t, schedule, sigma, rng_b, out_b);
    for (int i = 0; i < d; ++i) {
      const double scale = std::max({1.0, std::fabs(out_a[i]),
                                     std::fabs(out_b[i])});
      if (std::fabs(out_a[i] - out_b[i]) > 1e-12 * scale) {
        outcome.passed = false;
        outcome.detail = "case " + std::to_string(c) + " t=" +
                         std::to_string(t) + " " +
                         format_delta("step forms", out_a[i], out_b[i]);
        break;
      }
    }
  }
  if (outcome.passed) {
    outcome.detail = "1000 random cases agree within 1e-12";
  }
  return outcome;
}

OracleCheckOutcome check_ars_consistency(std::uint64_t seed) {
  OracleCheckOutcome outcome{"ars_consistency", true, ""};
  Rng rng = Rng::substream(seed, {0x9411ULL});
  for (int c = 0; c < 1000 && outcome.passed; ++c) {
    NoiseSchedule schedule = random_schedule(rng, 12);
    const int T = schedule.steps();
    // Guided steps with per-step scales and noise; huge budget so the filter
    // accepts everything.
    BudgetVector budget = make_budget(1e-6, 1);
    std::vector<double> sigma(1);
    std::vector<double> cost(1);
    std::vector<double> effective_sigmas;
    double spent = 0.0;
    for (int t = T; t >= 1; --t) {
      const double s = 0.05 + 0.95 * rng.next_double();
      sigma[0] = 0.05 + rng.next_double();
      if (privacy_filter(budget, s, t, schedule, sigma, cost) !=
          FilterVerdict::kOk) {
        continue;
      }
      spent += cost[0];
      effective_sigmas.push_back(
          sigma[0] / (s * std::sqrt(guidance_cost_coeff(schedule, t))));
    }
    if (effective_sigmas.empty()) continue;
    const double p_minus = 0.01 + 0.4 * rng.next_double();
    const double p_plus = p_minus + (0.99 - p_minus) * rng.next_double();
    const double route_a = ars_fixed_radius(effective_sigmas, p_plus, p_minus);
    const double route_b =
        certified_radius(1.0 / std::sqrt(spent), p_plus, p_minus);
    if (std::fabs(route_a - route_b) > 1e-9 * std::max(1.0, route_a)) {
      outcome.passed = false;
      outcome.detail = "case " + std::to_string(c) + " " +
                       format_delta("radius routes", route_b, route_a);
    }
  }
  if (outcome.passed) {
    outcome.detail = "1000 fixed-variance compositions agree within 1e-9";
  }
  return outcome;
}

}  // namespace

const std::vector<std::string>& oracle_check_names() {
  static const std::vector<std::string> names = {
      "denoiser_mc", "clopper_pearson", "phi_inv",
      "filter_ledger", "step_identity", "ars_consistency"};
  return names;
}

std::vector<OracleCheckOutcome> run_oracle_checks(
    const OracleCheckOptions& options) {
  if (options.checks.empty()) {
    throw std::invalid_argument("empty oracle battery selection");
  }
  std::set<std::string> selected;
  for (const std::string& name : options.checks) {
    if (name == "all") {
      selected.insert(oracle_check_names().begin(),
                      oracle_check_names().end());
      continue;
    }
    if (std::find(oracle_check_names().begin(), oracle_check_names().end(),
                  name) == oracle_check_names().end()) {
      throw std::invalid_argument("unknown oracle check: " + name);
    }
    selected.insert(name);
  }
  std::vector<OracleCheckOutcome> outcomes;
  for (const std::string& name : oracle_check_names()) {
    if (selected.count(name) == 0) continue;
    if (name == "denoiser_mc") {
      outcomes.push_back(check_denoiser_mc(options.seed));
    } else if (name == "clopper_pearson") {
      outcomes.push_back(check_clopper_pearson(options.seed));
    } else if (name == "phi_inv") {
      outcomes.push_back(check_phi_inv(options.seed));
    } else if (name == "filter_ledger") {
      outcomes.push_back(check_filter_ledger(options.seed,
                                             options.inject_fault));
    } else if (name == "step_identity") {
      outcomes.push_back(check_step_identity(options.seed));
    } else if (name == "ars_consistency") {
      outcomes.push_back(check_ars_consistency(options.seed));
    }
  }
  return outcomes;
}

FilterSimStats simulate_filter_runs(int runs, std::uint64_t seed,
                                    double cost_recompute_fudge) {
  FilterSimStats stats;
  stats.runs = runs;
  Rng rng = Rng::substream(seed, {0xf117ULL});
  for (int run = 0; run < runs; ++run) {
    NoiseSchedule schedule = random_schedule(rng, 50);
    const int T = schedule.steps();
    const int d = 1 + static_cast<int>(rng.next_double() * 8);
    const double rs_sigma = 0.3 + 2.7 * rng.next_double();
    BudgetVector budget = make_budget(rs_sigma, d);
    const double mu_sq = budget.mu_total * budget.mu_total;

    std::vector<double> sigma(d), cost(d), spent(d, 0.0);
    bool exhausted = false;
    bool mismatch = false;
    int post_exhaustion = 0;
    for (int t = T; t >= 1; --t) {
      double s = rng.next_double();
      if (rng.next_double() < 0.1) s = 0.0;
      for (double& v : sigma) {
        v = rng.next_double() < 0.05 ? 0.0 : 0.05 + 1.95 * rng.next_double();
      }
      const FilterVerdict verdict =
          privacy_filter(budget, s, t, schedule, sigma, cost);
      double scale_used = -1.0;
      if (verdict == FilterVerdict::kOk) {
        if (exhausted && s > 0.0) ++post_exhaustion;
        scale_used = s;
      } else {
        const double s_prime =
            max_feasible_scale(budget, t, schedule, sigma, s);
        if (exhausted && s_prime > 0.0) ++post_exhaustion;
        if (!exhausted && s_prime > 0.0) {
          spend_remaining(budget, s_prime, t, schedule, sigma, cost);
          scale_used = s_prime;
          exhausted = true;
        }
      }
      if (scale_used >= 0.0) {
        ++stats.accepted_spends;
        // Independent replay of the cost from the raw schedule vectors.
        const double bar_prev = schedule.alpha_bar(t - 1);
        const double one_minus_alpha = 1.0 - schedule.alpha(t);
        const double one_minus_bar = 1.0 - schedule.alpha_bar(t);
        const double c_t = cost_recompute_fudge * bar_prev * one_minus_alpha *
                           one_minus_alpha / (one_minus_bar * one_minus_bar);
        for (int i = 0; i < d; ++i) {
          const double ref =
              scale_used == 0.0
                  ? 0.0
                  : scale_used * scale_used * c_t / (sigma[i] * sigma[i]);
          if (std::fabs(cost[i] - ref) > 1e-12 * std::max(1.0, ref)) {
            mismatch = true;
          }
          spent[i] += cost[i];
        }
      }
      if (!exhausted && budget.min_lambda() <= 0.0) {
        exhausted = true;
      }
    }
    double excess = -mu_sq;
    for (int i = 0; i < d; ++i) {
      excess = std::max(excess, spent[i] - mu_sq);
    }
    stats.max_budget_excess = std::max(stats.max_budget_excess, excess);
    if (excess > 1e-12) ++stats.budget_violations;
    if (post_exhaustion > 0) ++stats.post_exhaustion_spends;
    if (mismatch) ++stats.cost_mismatches;
  }
  return stats;
}

}  // namespace smoothcert
