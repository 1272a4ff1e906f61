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

#include "smoothcert/denoiser.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace smoothcert {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

DenoiserOutput Denoiser::predict(std::span<const double> x_t, int t,
                                 const NoiseSchedule& schedule) const {
  if (static_cast<int>(x_t.size()) != dim()) {
    throw std::invalid_argument("denoiser input dimension mismatch");
  }
  DenoiserOutput out;
  out.x0_hat.resize(dim());
  out.sigma_diag.resize(dim());
  predict_into(x_t, t, schedule, out.x0_hat, out.sigma_diag);
  return out;
}

void ZeroDenoiser::predict_into(std::span<const double> /*x_t*/, int t,
                                const NoiseSchedule& schedule,
                                std::span<double> x0_hat,
                                std::span<double> sigma_diag) const {
  const double std = schedule.posterior_std(t);
  std::fill(x0_hat.begin(), x0_hat.end(), 0.0);
  std::fill(sigma_diag.begin(), sigma_diag.end(), std);
}

GmmDenoiser::GmmDenoiser(GmmModel gmm, const NoiseSchedule* bound_schedule)
    : gmm_(std::move(gmm)), bound_schedule_(bound_schedule) {
  gmm_.validate();
  if (bound_schedule_ == nullptr) {
    return;
  }
  const int K = gmm_.components();
  const int d = gmm_.dim();
  tables_.resize(bound_schedule_->steps());
  for (int t = 1; t <= bound_schedule_->steps(); ++t) {
    StepTable& table = tables_[t - 1];
    const double ab = bound_schedule_->alpha_bar(t);
    table.sqrt_ab = std::sqrt(ab);
    table.scaled_means.resize(static_cast<std::size_t>(K) * d);
    table.log_norm.resize(K);
    table.inv_two_v.resize(K);
    table.shrink.resize(K);
    for (int k = 0; k < K; ++k) {
      const double c = gmm_.scales[k];
      const double v = ab * c * c + (1.0 - ab);
      table.log_norm[k] =
          std::log(gmm_.weights[k]) - 0.5 * d * (kLogTwoPi + std::log(v));
      table.inv_two_v[k] = 0.5 / v;
      table.shrink[k] = table.sqrt_ab * c * c / v;
      for (int i = 0; i < d; ++i) {
        table.scaled_means[static_cast<std::size_t>(k) * d + i] =
            table.sqrt_ab * gmm_.means[k][i];
      }
    }
  }
}

void GmmDenoiser::predict_fast(const StepTable& table,
                               std::span<const double> x_t,
                               std::span<double> out) const {
  const int K = gmm_.components();
  const int d = gmm_.dim();
  double log_resp_stack[16];
  std::vector<double> log_resp_heap;
  double* log_resp = log_resp_stack;
  if (K > 16) {
    log_resp_heap.resize(K);
    log_resp = log_resp_heap.data();
  }
  double max_log = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    const double* sm = &table.scaled_means[static_cast<std::size_t>(k) * d];
    double dist_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double diff = x_t[i] - sm[i];
      dist_sq += diff * diff;
    }
    log_resp[k] = table.log_norm[k] - dist_sq * table.inv_two_v[k];
    max_log = std::max(max_log, log_resp[k]);
  }
  double norm = 0.0;
  for (int k = 0; k < K; ++k) {
    log_resp[k] = std::exp(log_resp[k] - max_log);
    norm += log_resp[k];
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int k = 0; k < K; ++k) {
    const double r = log_resp[k] / norm;
    const double shrink = table.shrink[k];
    const double* sm = &table.scaled_means[static_cast<std::size_t>(k) * d];
    const std::vector<double>& mu = gmm_.means[k];
    for (int i = 0; i < d; ++i) {
      out[i] += r * (mu[i] + shrink * (x_t[i] - sm[i]));
    }
  }
}

void GmmDenoiser::predict_into(std::span<const double> x_t, int t,
                               const NoiseSchedule& schedule,
                               std::span<double> x0_hat,
                               std::span<double> sigma_diag) const {
  const double std = schedule.posterior_std(t);
  std::fill(sigma_diag.begin(), sigma_diag.end(), std);
  if (&schedule == bound_schedule_) {
    predict_fast(tables_[t - 1], x_t, x0_hat);
  } else {
    gmm_posterior_mean_into(gmm_, x_t, schedule.alpha_bar(t), x0_hat);
  }
}

void x0_from_eps(std::span<const double> x_t, std::span<const double> eps,
                 double alpha_bar, std::span<double> x0_out) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) {
    throw std::invalid_argument("alpha_bar must lie in (0, 1]");
  }
  const double sqrt_ab = std::sqrt(alpha_bar);
  const double sqrt_res = std::sqrt(1.0 - alpha_bar);
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    x0_out[i] = (x_t[i] - sqrt_res * eps[i]) / sqrt_ab;
  }
}

void eps_from_x0(std::span<const double> x_t, std::span<const double> x0,
                 double alpha_bar, std::span<double> eps_out) {
  if (!(alpha_bar > 0.0 && alpha_bar < 1.0)) {
    throw std::invalid_argument("alpha_bar must lie in (0, 1)");
  }
  const double sqrt_ab = std::sqrt(alpha_bar);
  const double sqrt_res = std::sqrt(1.0 - alpha_bar);
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    eps_out[i] = (x_t[i] - sqrt_ab * x0[i]) / sqrt_res;
  }
}

}  // namespace smoothcert
