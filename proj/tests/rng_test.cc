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

#include "smoothcert/rng.h"

#include <cmath>
#include <vector>

#include "doctest.h"

using namespace smoothcert;

TEST_CASE("identical seeds give identical streams") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(123), d(124);
  bool differs = false;
  for (int i = 0; i < 10; ++i) {
    differs = differs || (c.next_u64() != d.next_u64());
  }
  CHECK(differs);
}

TEST_CASE("substream paths decorrelate streams") {
  CHECK(substream_seed(7, {1, 2}) != substream_seed(7, {2, 1}));
  CHECK(substream_seed(7, {1}) != substream_seed(8, {1}));
  Rng a = Rng::substream(7, {0, 5});
  Rng b = Rng::substream(7, {0, 5});
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform draws stay in range") {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.next_double_positive();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("gaussian draws have standard moments") {
  Rng rng(1234);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("unit directions have unit norm") {
  Rng rng(5);
  std::vector<double> v(7);
  for (int i = 0; i < 100; ++i) {
    rng.fill_unit_direction(v);
    double norm_sq = 0.0;
    for (double x : v) norm_sq += x * x;
    CHECK(norm_sq == doctest::Approx(1.0).epsilon(1e-12));
  }
}
