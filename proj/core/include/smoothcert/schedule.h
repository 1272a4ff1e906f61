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

#ifndef SMOOTHCERT_SCHEDULE_H_
#define SMOOTHCERT_SCHEDULE_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace smoothcert {

// DDPM variance ladder. Steps are indexed t = 1..T to match the usual
// convention, with alpha_bar(0) == 1 so that the t = 1 posterior variance is
// well defined (and equal to zero). Immutable after construction; safe to
// share across threads.
class NoiseSchedule {
 public:
  // Validates 0 < beta_1 <= ... <= beta_T < 1 and derives the other ladders.
  explicit NoiseSchedule(std::vector<double> betas);

  int steps() const { return static_cast<int>(betas_.size()); }

  // Checked 1-based accessors. alpha_bar also accepts t = 0.
  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;
  double posterior_var(int t) const;   // beta_tilde_t
  double posterior_std(int t) const;   // sqrt(beta_tilde_t)

  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<double>& alpha_bars() const { return alpha_bars_; }
  const std::vector<double>& posterior_vars() const { return posterior_vars_; }

  // Original timestep index behind each respaced step; empty when the
  // schedule has not been respaced.
  const std::vector<int>& timestep_map() const { return timestep_map_; }

  // Plain-text table (t, beta, alpha, alpha_bar, posterior_var), one step per
  // line, 17 significant digits. Used by fixture tests.
  void write_table(std::ostream& out) const;
  std::string to_table() const;

 private:
  friend NoiseSchedule respace(const NoiseSchedule&, std::span<const int>);

  NoiseSchedule() = default;

  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
  std::vector<double> posterior_vars_;
  std::vector<int> timestep_map_;

  void check_step(int t, int lowest) const;
  void derive_from_betas(bool require_monotone);
};

// Linear beta ramp from beta_start to beta_end inclusive. The 1000-step
// reference schedule uses the customary 1e-4 .. 0.02 range.
NoiseSchedule build_linear_schedule(int steps, double beta_start = 1e-4,
                                    double beta_end = 0.02);

// Subsequence schedule that keeps alpha_bar exactly at the selected original
// timesteps; the effective per-step alpha at respaced step j is
// alpha_bar(sel_j) / alpha_bar(sel_{j-1}). Indices are 1-based, strictly
// increasing, within 1..T.
NoiseSchedule respace(const NoiseSchedule& schedule,
                      std::span<const int> selected);

// count indices evenly spread over 1..T, always ending at T:
// floor(j * T / count) for j = 1..count.
std::vector<int> evenly_spaced_timesteps(int total_steps, int count);

// Smallest t with (1 - alpha_bar_t) / alpha_bar_t >= sigma^2, i.e. the first
// forward step at least as noisy as RS noise of std sigma. Throws when sigma
// exceeds the schedule's final noise level.
int match_timestep(const NoiseSchedule& schedule, double sigma);

// alpha_bar solving sigma^2 = (1 - alpha_bar) / alpha_bar exactly.
double matching_alpha_bar(double sigma);

}  // namespace smoothcert

#endif  // SMOOTHCERT_SCHEDULE_H_
