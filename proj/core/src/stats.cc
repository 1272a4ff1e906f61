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

#include "smoothcert/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace smoothcert {
namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt2Pi = 2.5066282746310005024;

// Acklam's rational approximation to the normal quantile (~1.2e-9 relative
// error before refinement).
double phi_inv_estimate(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
          a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_cont_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / kSqrt2);
}

double phi_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("phi_inv requires p in (0, 1)");
  }
  // Work in the lower half; 1 - p is exact for p >= 0.5.
  if (p > 0.5) {
    return -phi_inv(1.0 - p);
  }
  double x = phi_inv_estimate(p);
  for (int i = 0; i < 2; ++i) {
    const double err = normal_cdf(x) - p;
    const double density = std::exp(-0.5 * x * x) / kSqrt2Pi;
    if (density <= 0.0) break;
    const double step = err / density;
    // Halley correction; falls back to Newton when the quadratic term is
    // negligible.
    x -= step / (1.0 + 0.5 * x * step);
  }
  return x;
}

double reg_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) {
    throw std::invalid_argument("incomplete beta requires a, b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cont_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

double clopper_pearson_lower(int k, int n, double alpha) {
  if (n < 1 || k < 0 || k > n) {
    throw std::invalid_argument("clopper_pearson_lower requires 0 <= k <= n");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (k == 0) return 0.0;
  // P[Bin(n, p) >= k] = I_p(k, n - k + 1), increasing in p; bisect for the
  // point where the tail reaches alpha.
  const double a = static_cast<double>(k);
  const double b = static_cast<double>(n - k + 1);
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (reg_incomplete_beta(a, b, mid) <= alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double binomial_two_sided_pvalue(int k, int m) {
  if (m < 0 || k < 0 || k > m) {
    throw std::invalid_argument("binomial test requires 0 <= k <= m");
  }
  if (m == 0) return 1.0;
  const double log_half = -std::log(2.0) * m;
  const double lg_m1 = std::lgamma(m + 1.0);
  auto log_pmf = [&](int j) {
    return lg_m1 - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0) + log_half;
  };
  // Stable tail sums: accumulate relative to the largest term.
  auto tail = [&](int from, int to) {
    double max_term = -std::numeric_limits<double>::infinity();
    for (int j = from; j <= to; ++j) {
      max_term = std::max(max_term, log_pmf(j));
    }
    double acc = 0.0;
    for (int j = from; j <= to; ++j) {
      acc += std::exp(log_pmf(j) - max_term);
    }
    return std::min(1.0, std::exp(max_term) * acc);
  };
  const double lower = tail(0, k);
  const double upper = tail(k, m);
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

}  // namespace smoothcert
