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

#include "smoothcert/sampler.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "smoothcert/certify.h"

namespace smoothcert {

Method parse_method(const std::string& name) {
  if (name == "rs") return Method::kRs;
  if (name == "dds") return Method::kDds;
  if (name == "densepure") return Method::kDensePure;
  if (name == "adds") return Method::kAdds;
  if (name == "adds_oneshot") return Method::kAddsOneShot;
  throw std::invalid_argument("unknown method: " + name);
}

const char* method_name(Method method) {
  switch (method) {
    case Method::kRs: return "rs";
    case Method::kDds: return "dds";
    case Method::kDensePure: return "densepure";
    case Method::kAdds: return "adds";
    case Method::kAddsOneShot: return "adds_oneshot";
  }
  return "?";
}

void PipelineConfig::validate() const {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  if (!(guidance_scale >= 0.0 && guidance_scale <= 1.0)) {
    throw std::invalid_argument("guidance scale must lie in [0, 1]");
  }
  if (votes < 1) {
    throw std::invalid_argument("votes must be >= 1");
  }
  if (respaced_steps < 1) {
    throw std::invalid_argument("respaced step count must be >= 1");
  }
}

void Trajectory::write_debug(std::ostream& out) const {
  char buf[160];
  out << "t_exhausted " << t_exhausted << "\n";
  out << "state t min max\n";
  for (const TrajectoryPoint& p : states) {
    double lo = p.x.empty() ? 0.0 : p.x[0];
    double hi = lo;
    for (double v : p.x) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    std::snprintf(buf, sizeof(buf), "state %d %.17g %.17g\n", p.t, lo, hi);
    out << buf;
  }
  out << "spend t scale min_cost max_cost min_remaining\n";
  for (const SpendRecord& r : ledger) {
    double lo = r.cost.empty() ? 0.0 : r.cost[0];
    double hi = lo;
    for (double v : r.cost) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    std::snprintf(buf, sizeof(buf), "spend %d %.17g %.17g %.17g %.17g\n", r.t,
                  r.scale_used, lo, hi, r.min_remaining);
    out << buf;
  }
}

void ddpm_step_mean(std::span<const double> x_t,
                    std::span<const double> x0_hat, int t,
                    const NoiseSchedule& schedule, std::span<double> out) {
  if (x_t.size() != x0_hat.size() || x_t.size() != out.size()) {
    throw std::invalid_argument("ddpm_step: dimension mismatch");
  }
  const double one_minus_bar = 1.0 - schedule.alpha_bar(t);
  const double coef_x0 =
      std::sqrt(schedule.alpha_bar(t - 1)) * schedule.beta(t) / one_minus_bar;
  const double coef_xt = (1.0 - schedule.alpha_bar(t - 1)) *
                         std::sqrt(schedule.alpha(t)) / one_minus_bar;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = coef_x0 * x0_hat[i] + coef_xt * x_t[i];
  }
}

void ddpm_step(std::span<const double> x_t, std::span<const double> x0_hat,
               int t, const NoiseSchedule& schedule,
               std::span<const double> sigma_diag, Rng& rng,
               std::span<double> out) {
  ddpm_step_mean(x_t, x0_hat, t, schedule, out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += sigma_diag[i] * rng.next_gaussian();
  }
}

void ddpm_step_eps_form(std::span<const double> x_t,
                        std::span<const double> eps_hat, int t,
                        const NoiseSchedule& schedule,
                        std::span<const double> sigma_diag, Rng& rng,
                        std::span<double> out) {
  if (x_t.size() != eps_hat.size() || x_t.size() != out.size()) {
    throw std::invalid_argument("ddpm_step_eps_form: dimension mismatch");
  }
  const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
  const double eps_coef =
      schedule.beta(t) / std::sqrt(1.0 - schedule.alpha_bar(t));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = inv_sqrt_alpha * (x_t[i] - eps_coef * eps_hat[i]) +
             sigma_diag[i] * rng.next_gaussian();
  }
}

void apply_guidance(std::span<double> x0_hat, std::span<const double> x,
                    double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("guidance scale must lie in [0, 1]");
  }
  if (s == 0.0) {
    return;  // no-op; x is deliberately never read
  }
  if (x0_hat.size() != x.size()) {
    throw std::invalid_argument("apply_guidance: dimension mismatch");
  }
  const double keep = 1.0 - s;
  for (std::size_t i = 0; i < x0_hat.size(); ++i) {
    x0_hat[i] = keep * x0_hat[i] + s * x[i];
  }
}

std::vector<double> one_shot_x0(std::span<const double> x_t, int t,
                                const Denoiser& denoiser,
                                const NoiseSchedule& schedule) {
  return denoiser.predict(x_t, t, schedule).x0_hat;
}

PipelineSampler::PipelineSampler(const PipelineConfig& config,
                                 const Denoiser& denoiser,
                                 const NoiseSchedule& schedule)
    : config_(config), denoiser_(&denoiser), schedule_(&schedule),
      dim_(denoiser.dim()) {
  config_.validate();
  if (dim_ < 1) {
    throw std::invalid_argument("denoiser dimension must be >= 1");
  }
  if (config_.method == Method::kDds || config_.method == Method::kDensePure) {
    t_star_ = match_timestep(schedule, config_.sigma);
    sqrt_ab_star_ = std::sqrt(schedule.alpha_bar(t_star_));
    if (config_.noising == NoisingConvention::kSigmaDirect) {
      sigma_prime_ = config_.sigma;
    } else {
      const double bar = schedule.alpha_bar(t_star_);
      sigma_prime_ = std::sqrt((1.0 - bar) / bar);
    }
  }
  x_t_.resize(dim_);
  x_next_.resize(dim_);
  x0_hat_.resize(dim_);
  sigma_diag_.resize(dim_);
  cost_.resize(dim_);
}

void PipelineSampler::record_state(Trajectory* trajectory, int t,
                                   std::span<const double> x) const {
  if (trajectory == nullptr) return;
  trajectory->states.push_back({t, {x.begin(), x.end()}});
}

void PipelineSampler::record_spend(Trajectory* trajectory, int t,
                                   double scale) const {
  if (trajectory == nullptr) return;
  SpendRecord record;
  record.t = t;
  record.scale_used = scale;
  record.cost = cost_;
  record.min_remaining = budget_.min_lambda();
  trajectory->ledger.push_back(std::move(record));
}

PipelineSampler::PrefixResult PipelineSampler::run_guided_prefix(
    std::span<const double> x, Rng& rng, Trajectory* trajectory) {
  const double s = config_.guidance_scale;
  const bool one_shot = config_.method == Method::kAddsOneShot;

  budget_ = make_budget(config_.sigma, dim_);
  rng.fill_gaussian(x_t_);  // x_T ~ N(0, I)
  record_state(trajectory, schedule_->steps(), x_t_);

  bool exhausted = false;
  for (int t = schedule_->steps(); t >= 1; --t) {
    denoiser_->predict_into(x_t_, t, *schedule_, x0_hat_, sigma_diag_);
    if (!exhausted) {
      const FilterVerdict verdict =
          privacy_filter(budget_, s, t, *schedule_, sigma_diag_, cost_);
      if (verdict == FilterVerdict::kOk) {
        apply_guidance(x0_hat_, x, s);
        record_spend(trajectory, t, s);
      } else {
        // Out of budget at the requested scale: fall back to the largest
        // scale that expends the rest of the budget, if any.
        const double s_prime =
            max_feasible_scale(budget_, t, *schedule_, sigma_diag_, s);
        if (s_prime > 0.0) {
          spend_remaining(budget_, s_prime, t, *schedule_, sigma_diag_, cost_);
          apply_guidance(x0_hat_, x, s_prime);
          record_spend(trajectory, t, s_prime);
          exhausted = true;
          if (trajectory != nullptr) trajectory->t_exhausted = t;
          if (one_shot) {
            // Final image is the guided prediction at the exhaustion step; no
            // further stochastic steps.
            return {t, /*early_image=*/true};
          }
        }
        // s_prime == 0 with remaining budget means a zero-noise pixel made
        // guidance impossible at this step; skip guidance and keep going.
      }
    }
    ddpm_step(x_t_, x0_hat_, t, *schedule_, sigma_diag_, rng, x_next_);
    std::swap(x_t_, x_next_);
    record_state(trajectory, t - 1, x_t_);
    if (exhausted && !one_shot) {
      return {t - 1, /*early_image=*/false};
    }
  }
  return {0, /*early_image=*/false};
}

void PipelineSampler::complete_unguided(int from_t, Rng& rng,
                                        std::vector<double>& state,
                                        Trajectory* trajectory) {
  for (int t = from_t; t >= 1; --t) {
    denoiser_->predict_into(state, t, *schedule_, x0_hat_, sigma_diag_);
    ddpm_step(state, x0_hat_, t, *schedule_, sigma_diag_, rng, x_next_);
    std::swap(state, x_next_);
    record_state(trajectory, t - 1, state);
  }
}

void PipelineSampler::guided_denoise(std::span<const double> x, Rng& rng,
                                     std::vector<double>& x0_out,
                                     Trajectory* trajectory) {
  if (config_.method != Method::kAdds &&
      config_.method != Method::kAddsOneShot) {
    throw std::invalid_argument(
        "guided_denoise requires an adds pipeline configuration");
  }
  if (static_cast<int>(x.size()) != dim_) {
    throw std::invalid_argument("guided_denoise: input dimension mismatch");
  }
  const PrefixResult prefix = run_guided_prefix(x, rng, trajectory);
  if (prefix.early_image) {
    x0_out = x0_hat_;
    return;
  }
  complete_unguided(prefix.next_t, rng, x_t_, trajectory);
  x0_out = x_t_;
}

void PipelineSampler::run_pipeline(std::span<const double> x, Rng& rng,
                                   Trajectory* trajectory) {
  if (static_cast<int>(x.size()) != dim_) {
    throw std::invalid_argument("pipeline input dimension mismatch");
  }
  const int votes =
      (config_.method == Method::kDensePure || config_.method == Method::kAdds)
          ? config_.votes
          : 1;
  outputs_.resize(votes);
  for (auto& branch : outputs_) {
    branch.resize(dim_);
  }

  switch (config_.method) {
    case Method::kRs: {
      rng.fill_gaussian(outputs_[0]);
      for (int i = 0; i < dim_; ++i) {
        outputs_[0][i] = x[i] + config_.sigma * outputs_[0][i];
      }
      record_state(trajectory, 0, outputs_[0]);
      return;
    }
    case Method::kDds: {
      // Embed the RS sample on the trajectory, then one-shot denoise.
      rng.fill_gaussian(x_t_);
      for (int i = 0; i < dim_; ++i) {
        x_t_[i] = sqrt_ab_star_ * (x[i] + sigma_prime_ * x_t_[i]);
      }
      record_state(trajectory, t_star_, x_t_);
      denoiser_->predict_into(x_t_, t_star_, *schedule_, outputs_[0],
                              sigma_diag_);
      record_state(trajectory, 0, outputs_[0]);
      return;
    }
    case Method::kDensePure: {
      rng.fill_gaussian(x_t_);
      for (int i = 0; i < dim_; ++i) {
        x_t_[i] = sqrt_ab_star_ * (x[i] + sigma_prime_ * x_t_[i]);
      }
      record_state(trajectory, t_star_, x_t_);
      if (votes == 1) {
        outputs_[0] = x_t_;
        complete_unguided(t_star_, rng, outputs_[0], trajectory);
        return;
      }
      const std::uint64_t fork = rng.next_u64();
      for (int b = 0; b < votes; ++b) {
        Rng branch_rng = Rng::substream(fork, {static_cast<std::uint64_t>(b)});
        outputs_[b] = x_t_;
        complete_unguided(t_star_, branch_rng, outputs_[b],
                          b == 0 ? trajectory : nullptr);
      }
      return;
    }
    case Method::kAdds: {
      if (config_.independent_votes && votes > 1) {
        const std::uint64_t fork = rng.next_u64();
        for (int b = 0; b < votes; ++b) {
          Rng vote_rng = Rng::substream(fork, {static_cast<std::uint64_t>(b)});
          guided_denoise(x, vote_rng, outputs_[b],
                         b == 0 ? trajectory : nullptr);
        }
        return;
      }
      const PrefixResult prefix = run_guided_prefix(x, rng, trajectory);
      if (votes == 1) {
        outputs_[0] = x_t_;
        complete_unguided(prefix.next_t, rng, outputs_[0], trajectory);
        return;
      }
      // Votes fork on the state left after the last guided (re-noised) step;
      // the completions are unguided and need no budget.
      const std::uint64_t fork = rng.next_u64();
      for (int b = 0; b < votes; ++b) {
        Rng branch_rng = Rng::substream(fork, {static_cast<std::uint64_t>(b)});
        outputs_[b] = x_t_;
        complete_unguided(prefix.next_t, branch_rng, outputs_[b],
                          b == 0 ? trajectory : nullptr);
      }
      return;
    }
    case Method::kAddsOneShot: {
      guided_denoise(x, rng, outputs_[0], trajectory);
      return;
    }
  }
  throw std::invalid_argument("unknown pipeline method");
}

void PipelineSampler::sample(std::span<const double> x, Rng& rng,
                             std::vector<std::vector<double>>& out,
                             Trajectory* trajectory) {
  run_pipeline(x, rng, trajectory);
  out = outputs_;
}

int PipelineSampler::sample_label(std::span<const double> x, Rng& rng,
                                  const Classifier& g) {
  run_pipeline(x, rng, nullptr);
  if (outputs_.size() == 1) {
    return g.classify(outputs_[0]);
  }
  branch_labels_.resize(outputs_.size());
  for (std::size_t b = 0; b < outputs_.size(); ++b) {
    branch_labels_[b] = g.classify(outputs_[b]);
  }
  return majority_vote(branch_labels_);
}

}  // namespace smoothcert
