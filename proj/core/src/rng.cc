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

namespace smoothcert {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master,
                             std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master ^ 0x243f6a8885a308d3ULL);
  for (std::uint64_t v : path) {
    h = splitmix64(h ^ v);
  }
  return h;
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t z = seed;
  for (auto& word : s_) {
    z = splitmix64(z);
    word = z;
  }
  // All-zero state would be absorbing; splitmix64 output makes this
  // unreachable in practice, but guard anyway.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) {
    s_[0] = 0x9e3779b97f4a7c15ULL;
  }
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_double_positive() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_double_positive();
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = kTwoPi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

void Rng::fill_gaussian(std::span<double> out) {
  for (double& v : out) {
    v = next_gaussian();
  }
}

void Rng::fill_unit_direction(std::span<double> out) {
  double norm_sq = 0.0;
  do {
    fill_gaussian(out);
    norm_sq = 0.0;
    for (double v : out) {
      norm_sq += v * v;
    }
  } while (norm_sq < 1e-300);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : out) {
    v *= inv;
  }
}

}  // namespace smoothcert
