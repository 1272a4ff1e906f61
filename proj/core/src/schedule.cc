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

#include "smoothcert/schedule.h"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace smoothcert {

NoiseSchedule::NoiseSchedule(std::vector<double> betas)
    : betas_(std::move(betas)) {
  derive_from_betas(/*require_monotone=*/true);
}

void NoiseSchedule::derive_from_betas(bool require_monotone) {
  const int T = static_cast<int>(betas_.size());
  if (T < 1) {
    throw std::invalid_argument("schedule needs at least one step");
  }
  double prev_beta = 0.0;
  for (int i = 0; i < T; ++i) {
    const double b = betas_[i];
    if (!(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("beta values must lie in (0, 1)");
    }
    if (require_monotone && b < prev_beta) {
      throw std::invalid_argument("beta values must be nondecreasing");
    }
    prev_beta = b;
  }
  alphas_.resize(T);
  alpha_bars_.resize(T);
  posterior_vars_.resize(T);
  double running = 1.0;
  for (int i = 0; i < T; ++i) {
    alphas_[i] = 1.0 - betas_[i];
    const double prev_bar = running;
    running *= alphas_[i];
    alpha_bars_[i] = running;
    // beta_tilde_t = (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t) * beta_t;
    // zero at t = 1 because alpha_bar_0 == 1.
    posterior_vars_[i] = (1.0 - prev_bar) / (1.0 - running) * betas_[i];
  }
}

void NoiseSchedule::check_step(int t, int lowest) const {
  if (t < lowest || t > steps()) {
    throw std::invalid_argument("timestep out of schedule range");
  }
}

double NoiseSchedule::beta(int t) const {
  check_step(t, 1);
  return betas_[t - 1];
}

double NoiseSchedule::alpha(int t) const {
  check_step(t, 1);
  return alphas_[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
  check_step(t, 0);
  return t == 0 ? 1.0 : alpha_bars_[t - 1];
}

double NoiseSchedule::posterior_var(int t) const {
  check_step(t, 1);
  return posterior_vars_[t - 1];
}

double NoiseSchedule::posterior_std(int t) const {
  return std::sqrt(posterior_var(t));
}

void NoiseSchedule::write_table(std::ostream& out) const {
  out << "t beta alpha alpha_bar posterior_var\n";
  char line[192];
  for (int t = 1; t <= steps(); ++t) {
    std::snprintf(line, sizeof(line), "%d %.17g %.17g %.17g %.17g\n", t,
                  betas_[t - 1], alphas_[t - 1], alpha_bars_[t - 1],
                  posterior_vars_[t - 1]);
    out << line;
  }
}

std::string NoiseSchedule::to_table() const {
  std::ostringstream out;
  write_table(out);
  return out.str();
}

NoiseSchedule build_linear_schedule(int steps, double beta_start,
                                    double beta_end) {
  if (steps < 1) {
    throw std::invalid_argument("step count must be >= 1");
  }
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw std::invalid_argument("need 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(steps);
  if (steps == 1) {
    betas[0] = beta_start;
  } else {
    const double span = beta_end - beta_start;
    for (int i = 0; i < steps; ++i) {
      betas[i] = beta_start + span * static_cast<double>(i) /
                                  static_cast<double>(steps - 1);
    }
    betas.back() = beta_end;
  }
  return NoiseSchedule(std::move(betas));
}

NoiseSchedule respace(const NoiseSchedule& schedule,
                      std::span<const int> selected) {
  if (selected.empty()) {
    throw std::invalid_argument("respace selection must be non-empty");
  }
  int prev = 0;
  for (int idx : selected) {
    if (idx <= prev || idx > schedule.steps()) {
      throw std::invalid_argument(
          "respace indices must be strictly increasing within 1..T");
    }
    prev = idx;
  }
  // Effective alphas preserve alpha_bar at the selected timesteps. They are
  // in (0, 1) by construction but need not be monotone, so the respaced
  // schedule skips the monotonicity check.
  std::vector<double> betas(selected.size());
  double prev_bar = 1.0;
  for (std::size_t j = 0; j < selected.size(); ++j) {
    const double bar = schedule.alpha_bar(selected[j]);
    betas[j] = 1.0 - bar / prev_bar;
    prev_bar = bar;
  }
  NoiseSchedule out;
  out.betas_ = std::move(betas);
  out.derive_from_betas(/*require_monotone=*/false);
  out.timestep_map_.assign(selected.begin(), selected.end());
  return out;
}

std::vector<int> evenly_spaced_timesteps(int total_steps, int count) {
  if (count < 1 || count > total_steps) {
    throw std::invalid_argument("need 1 <= count <= total_steps");
  }
  std::vector<int> indices(count);
  for (int j = 1; j <= count; ++j) {
    indices[j - 1] = static_cast<int>(
        (static_cast<long long>(j) * total_steps) / count);
  }
  return indices;
}

int match_timestep(const NoiseSchedule& schedule, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  const double target = sigma * sigma;
  for (int t = 1; t <= schedule.steps(); ++t) {
    const double bar = schedule.alpha_bar(t);
    if ((1.0 - bar) / bar >= target) {
      return t;
    }
  }
  throw std::runtime_error("noise exceeds schedule: no timestep is as noisy "
                           "as the requested sigma");
}

double matching_alpha_bar(double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  return 1.0 / (1.0 + sigma * sigma);
}

}  // namespace smoothcert
