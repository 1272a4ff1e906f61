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

#include "smoothcert/oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "smoothcert/rng.h"
#include "smoothcert/stats.h"

namespace smoothcert {

double phi_inv_bisect(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("phi_inv_bisect requires p in (0, 1)");
  }
  // The CDF saturates in double precision near 1; 1 - p is exact for
  // p >= 0.5, so resolve the upper tail through the lower one.
  if (p > 0.5) {
    return -phi_inv_bisect(1.0 - p);
  }
  double lo = -10.0;
  double hi = 10.0;
  for (int i = 0; i < 120; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double binomial_tail_geq(int k, int n, double p) {
  if (n < 1 || k < 0 || k > n) {
    throw std::invalid_argument("binomial_tail_geq requires 0 <= k <= n");
  }
  if (k == 0) return 1.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double lg_n1 = std::lgamma(n + 1.0);
  double max_term = -std::numeric_limits<double>::infinity();
  for (int j = k; j <= n; ++j) {
    const double term = lg_n1 - std::lgamma(j + 1.0) -
                        std::lgamma(n - j + 1.0) + j * log_p +
                        (n - j) * log_q;
    max_term = std::max(max_term, term);
  }
  double acc = 0.0;
  for (int j = k; j <= n; ++j) {
    const double term = lg_n1 - std::lgamma(j + 1.0) -
                        std::lgamma(n - j + 1.0) + j * log_p +
                        (n - j) * log_q;
    acc += std::exp(term - max_term);
  }
  return std::min(1.0, std::exp(max_term) * acc);
}

double clopper_pearson_lower_bisect(int k, int n, double alpha) {
  if (n < 1 || k < 0 || k > n) {
    throw std::invalid_argument("requires 0 <= k <= n");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (k == 0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (binomial_tail_geq(k, n, mid) <= alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

long double alpha_bar_product_oracle(std::span<const double> betas, int t) {
  if (t < 0 || t > static_cast<int>(betas.size())) {
    throw std::invalid_argument("t out of range");
  }
  long double product = 1.0L;
  for (int s = 0; s < t; ++s) {
    product *= (1.0L - static_cast<long double>(betas[s]));
  }
  return product;
}

McEstimate mc_posterior_mean_oracle(const GmmModel& gmm,
                                    std::span<const double> x_t,
                                    double alpha_bar, int n_samples,
                                    std::uint64_t seed) {
  gmm.validate();
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) {
    throw std::invalid_argument("alpha_bar must lie in (0, 1]");
  }
  if (n_samples < 1000) {
    throw std::invalid_argument("oracle needs n_samples >= 1000");
  }
  const int d = gmm.dim();
  if (static_cast<int>(x_t.size()) != d) {
    throw std::invalid_argument("oracle input dimension mismatch");
  }

  McEstimate out;
  out.estimate.assign(d, 0.0);
  out.std_error.assign(d, 0.0);
  if (alpha_bar == 1.0) {
    // Conditioning on the clean image itself.
    out.estimate.assign(x_t.begin(), x_t.end());
    return out;
  }

  const double sqrt_ab = std::sqrt(alpha_bar);
  const double residual = 1.0 - alpha_bar;
  const double lik_var = residual / alpha_bar;  // likelihood width over x0
  const double lik_std = std::sqrt(lik_var);
  constexpr double kLogTwoPi = 1.8378770664093454836;

  // Self-normalized IS with a defensive two-component proposal: half the
  // draws come from the prior, half from the likelihood centered at
  // x_t / sqrt(ab). The balance-heuristic weights stay bounded whether the
  // likelihood or the prior is the peaked factor.
  auto log_prior = [&](const double* x0) {
    double best = -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    std::vector<double> terms(gmm.components());
    for (int k = 0; k < gmm.components(); ++k) {
      const double cc = gmm.scales[k];
      double dist_sq = 0.0;
      for (int i = 0; i < d; ++i) {
        const double diff = x0[i] - gmm.means[k][i];
        dist_sq += diff * diff;
      }
      terms[k] = std::log(gmm.weights[k]) -
                 0.5 * d * (kLogTwoPi + 2.0 * std::log(cc)) -
                 0.5 * dist_sq / (cc * cc);
      best = std::max(best, terms[k]);
    }
    for (int k = 0; k < gmm.components(); ++k) {
      acc += std::exp(terms[k] - best);
    }
    return best + std::log(acc);
  };

  std::vector<double> samples(static_cast<std::size_t>(n_samples) * d);
  std::vector<double> log_w(n_samples);
  Rng rng = Rng::substream(seed, {0x0c1eULL});
  double max_log = -std::numeric_limits<double>::infinity();
  const double log_half = std::log(0.5);
  for (int j = 0; j < n_samples; ++j) {
    double* x0 = &samples[static_cast<std::size_t>(j) * d];
    if (j % 2 == 0) {
      const double u = rng.next_double();
      int k = 0;
      double acc = gmm.weights[0];
      while (u >= acc && k + 1 < gmm.components()) {
        ++k;
        acc += gmm.weights[k];
      }
      for (int i = 0; i < d; ++i) {
        x0[i] = gmm.means[k][i] + gmm.scales[k] * rng.next_gaussian();
      }
    } else {
      for (int i = 0; i < d; ++i) {
        x0[i] = x_t[i] / sqrt_ab + lik_std * rng.next_gaussian();
      }
    }
    double dist_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double diff = x_t[i] - sqrt_ab * x0[i];
      dist_sq += diff * diff;
    }
    const double lp = log_prior(x0);
    const double log_lik =
        -0.5 * d * (kLogTwoPi + std::log(residual)) - 0.5 * dist_sq / residual;
    // Likelihood as a normalized density over x0 picks up an ab^(d/2) factor.
    const double log_lik_density = log_lik + 0.5 * d * std::log(alpha_bar);
    const double log_q = std::max(log_half + lp, log_half + log_lik_density) +
                         std::log1p(std::exp(
                             -std::fabs(lp - log_lik_density)));
    log_w[j] = lp + log_lik - log_q;
    max_log = std::max(max_log, log_w[j]);
  }
  if (!std::isfinite(max_log)) {
    throw std::runtime_error("oracle ill-conditioned: all weights underflow");
  }

  double norm = 0.0;
  for (int j = 0; j < n_samples; ++j) {
    log_w[j] = std::exp(log_w[j] - max_log);
    norm += log_w[j];
  }
  for (int j = 0; j < n_samples; ++j) {
    const double w = log_w[j] / norm;
    const double* x0 = &samples[static_cast<std::size_t>(j) * d];
    for (int i = 0; i < d; ++i) {
      out.estimate[i] += w * x0[i];
    }
  }
  for (int j = 0; j < n_samples; ++j) {
    const double w = log_w[j] / norm;
    const double* x0 = &samples[static_cast<std::size_t>(j) * d];
    for (int i = 0; i < d; ++i) {
      const double diff = x0[i] - out.estimate[i];
      out.std_error[i] += w * w * diff * diff;
    }
  }
  for (int i = 0; i < d; ++i) {
    out.std_error[i] = std::sqrt(out.std_error[i]);
  }
  return out;
}

}  // namespace smoothcert
