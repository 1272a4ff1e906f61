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

#include "smoothcert/gmm.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "smoothcert/denoiser.h"
#include "smoothcert/oracles.h"
#include "smoothcert/rng.h"
#include "smoothcert/schedule.h"

using namespace smoothcert;

namespace {

GmmModel single_component(double mean, double scale) {
  GmmModel gmm;
  gmm.weights = {1.0};
  gmm.means = {{mean}};
  gmm.scales = {scale};
  gmm.labels = {0};
  return gmm;
}

GmmModel random_gmm(Rng& rng, int max_components, int max_dim) {
  const int K = 1 + static_cast<int>(rng.next_double() * max_components);
  const int d = 1 + static_cast<int>(rng.next_double() * max_dim);
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
  return gmm;
}

}  // namespace

TEST_CASE("posterior mean of a unit prior shrinks by sqrt(alpha_bar)") {
  // mu = 0, c = 1, ab = 0.5: E[x0 | x_t] = sqrt(0.5) x_t.
  const GmmModel gmm = single_component(0.0, 1.0);
  const std::vector<double> x_t = {2.0};
  const std::vector<double> out = gmm_posterior_mean(gmm, x_t, 0.5);
  CHECK(out[0] == doctest::Approx(std::sqrt(0.5) * 2.0).epsilon(1e-12));
  CHECK(out[0] == doctest::Approx(1.41421).epsilon(1e-5));
}

TEST_CASE("posterior mean conditions exactly at alpha_bar = 1") {
  Rng rng(3);
  GmmModel gmm = random_gmm(rng, 3, 3);
  std::vector<double> x_t(gmm.dim());
  rng.fill_gaussian(x_t);
  const std::vector<double> out = gmm_posterior_mean(gmm, x_t, 1.0);
  for (int i = 0; i < gmm.dim(); ++i) {
    CHECK(out[i] == doctest::Approx(x_t[i]).epsilon(1e-12));
  }
}

TEST_CASE("symmetric mixture has zero posterior mean at the origin") {
  GmmModel gmm;
  gmm.weights = {0.5, 0.5};
  gmm.means = {{3.0, -1.0}, {-3.0, 1.0}};
  gmm.scales = {0.7, 0.7};
  gmm.labels = {0, 1};
  const std::vector<double> x_t = {0.0, 0.0};
  const std::vector<double> out = gmm_posterior_mean(gmm, x_t, 0.4);
  CHECK(std::fabs(out[0]) < 1e-12);
  CHECK(std::fabs(out[1]) < 1e-12);
}

TEST_CASE("posterior mean matches the importance-sampling oracle") {
  Rng rng(11);
  int failures = 0;
  for (int c = 0; c < 12; ++c) {
    GmmModel gmm = random_gmm(rng, 3, 3);
    std::vector<double> x_t(gmm.dim());
    rng.fill_gaussian(x_t);
    const double alpha_bar = 0.05 + 0.9 * rng.next_double();
    const std::vector<double> analytic =
        gmm_posterior_mean(gmm, x_t, alpha_bar);
    const McEstimate mc =
        mc_posterior_mean_oracle(gmm, x_t, alpha_bar, 30000, 1000 + c);
    for (int i = 0; i < gmm.dim(); ++i) {
      if (std::fabs(analytic[i] - mc.estimate[i]) >
          3.0 * std::max(mc.std_error[i], 1e-12)) {
        ++failures;
      }
    }
  }
  CHECK(failures <= 1);
}

TEST_CASE("posterior mean limits") {
  Rng rng(13);
  GmmModel gmm = random_gmm(rng, 3, 2);
  std::vector<double> x_t(gmm.dim());
  rng.fill_gaussian(x_t);
  // alpha_bar -> 1: conditioning on the clean image.
  const std::vector<double> near_one =
      gmm_posterior_mean(gmm, x_t, 1.0 - 1e-9);
  for (int i = 0; i < gmm.dim(); ++i) {
    CHECK(near_one[i] ==
          doctest::Approx(x_t[i]).epsilon(1e-3));
  }
  // alpha_bar -> 0: the prior mean.
  std::vector<double> prior_mean(gmm.dim(), 0.0);
  for (int k = 0; k < gmm.components(); ++k) {
    for (int i = 0; i < gmm.dim(); ++i) {
      prior_mean[i] += gmm.weights[k] * gmm.means[k][i];
    }
  }
  const std::vector<double> near_zero = gmm_posterior_mean(gmm, x_t, 1e-9);
  for (int i = 0; i < gmm.dim(); ++i) {
    CHECK(std::fabs(near_zero[i] - prior_mean[i]) < 1e-3);
  }
}

TEST_CASE("posterior mean validates inputs") {
  const GmmModel gmm = single_component(0.0, 1.0);
  const std::vector<double> x_t = {1.0};
  CHECK_THROWS_AS(gmm_posterior_mean(gmm, x_t, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gmm_posterior_mean(gmm, x_t, 1.5), std::invalid_argument);
  const std::vector<double> wrong_dim = {1.0, 2.0};
  CHECK_THROWS_AS(gmm_posterior_mean(gmm, wrong_dim, 0.5),
                  std::invalid_argument);
}

TEST_CASE("mc oracle is deterministic and flags ill-conditioned inputs") {
  Rng rng(17);
  GmmModel gmm = random_gmm(rng, 2, 2);
  std::vector<double> x_t(gmm.dim(), 0.3);
  const McEstimate a = mc_posterior_mean_oracle(gmm, x_t, 0.5, 2000, 99);
  const McEstimate b = mc_posterior_mean_oracle(gmm, x_t, 0.5, 2000, 99);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
  CHECK_THROWS_AS(mc_posterior_mean_oracle(gmm, x_t, 0.5, 10, 99),
                  std::invalid_argument);
  // A state astronomically far from the prior underflows every weight.
  std::vector<double> far(gmm.dim(), 1e200);
  CHECK_THROWS_AS(mc_posterior_mean_oracle(gmm, far, 0.5, 2000, 99),
                  std::runtime_error);
  // alpha_bar = 1 returns the state itself with zero spread.
  const McEstimate exact = mc_posterior_mean_oracle(gmm, x_t, 1.0, 2000, 99);
  CHECK(exact.estimate[0] == x_t[0]);
  CHECK(exact.std_error[0] == 0.0);
}

TEST_CASE("gmm denoiser uses the schedule default covariance") {
  const NoiseSchedule schedule = build_linear_schedule(6, 0.05, 0.3);
  const GmmModel gmm = single_component(0.0, 1.0);
  const GmmDenoiser denoiser(gmm, &schedule);
  std::vector<double> x_t = {0.7};
  for (int t = 1; t <= 6; ++t) {
    const DenoiserOutput out = denoiser.predict(x_t, t, schedule);
    CHECK(out.sigma_diag[0] == schedule.posterior_std(t));
    CHECK(out.x0_hat[0] ==
          doctest::Approx(
              gmm_posterior_mean(gmm, x_t, schedule.alpha_bar(t))[0])
              .epsilon(1e-14));
  }
}

TEST_CASE("bound-schedule fast path equals the generic path") {
  const NoiseSchedule schedule = build_linear_schedule(10, 0.02, 0.4);
  Rng rng(23);
  GmmModel gmm = random_gmm(rng, 3, 3);
  const GmmDenoiser bound(gmm, &schedule);
  const GmmDenoiser generic(gmm, nullptr);
  std::vector<double> x_t(gmm.dim());
  for (int rep = 0; rep < 20; ++rep) {
    rng.fill_gaussian(x_t);
    const int t = 1 + static_cast<int>(rng.next_double() * 10);
    const DenoiserOutput fast = bound.predict(x_t, t, schedule);
    const DenoiserOutput slow = generic.predict(x_t, t, schedule);
    for (int i = 0; i < gmm.dim(); ++i) {
      CHECK(fast.x0_hat[i] ==
            doctest::Approx(slow.x0_hat[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("zero denoiser predicts zero") {
  const NoiseSchedule schedule = build_linear_schedule(4, 0.1, 0.3);
  const ZeroDenoiser denoiser(3);
  const std::vector<double> x_t = {1.0, -2.0, 0.5};
  const DenoiserOutput out = denoiser.predict(x_t, 2, schedule);
  CHECK(out.x0_hat == std::vector<double>{0.0, 0.0, 0.0});
  CHECK_THROWS_AS(denoiser.predict(std::vector<double>{1.0}, 2, schedule),
                  std::invalid_argument);
}

TEST_CASE("gmm spec round trips through text") {
  Rng rng(29);
  GmmModel gmm = random_gmm(rng, 4, 3);
  std::stringstream stream;
  save_gmm(gmm, stream);
  const GmmModel loaded = load_gmm(stream);
  CHECK(loaded.weights == gmm.weights);
  CHECK(loaded.means == gmm.means);
  CHECK(loaded.scales == gmm.scales);
  CHECK(loaded.labels == gmm.labels);
}

TEST_CASE("gmm parse errors carry line numbers") {
  std::stringstream bad_header("gmm -1 2\n");
  CHECK_THROWS_AS(load_gmm(bad_header), ParseError);
  std::stringstream missing("gmm 1 1\nweights\n1.0\nmeans\n");
  try {
    load_gmm(missing);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line() >= 4);
  }
  std::stringstream empty("");
  CHECK_THROWS_AS(load_gmm(empty), ParseError);
}

TEST_CASE("gmm validation rejects broken models") {
  GmmModel gmm = single_component(0.0, 1.0);
  gmm.weights = {0.5};  // does not sum to 1
  CHECK_THROWS_AS(gmm.validate(), std::invalid_argument);
  gmm = single_component(0.0, 1.0);
  gmm.scales = {0.0};
  CHECK_THROWS_AS(gmm.validate(), std::invalid_argument);
  gmm = single_component(0.0, 1.0);
  gmm.means = {{1.0, 2.0}};
  CHECK(gmm.dim() == 2);  // consistent shape, still fine
  gmm.means.push_back({3.0});
  gmm.weights = {0.5, 0.5};
  gmm.scales = {1.0, 1.0};
  gmm.labels = {0, 1};
  CHECK_THROWS_AS(gmm.validate(), std::invalid_argument);
}
