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

#ifndef SMOOTHCERT_CERTIFY_H_
#define SMOOTHCERT_CERTIFY_H_

#include <cstdint>
#include <span>

#include "smoothcert/classifier.h"
#include "smoothcert/rng.h"
#include "smoothcert/sampler.h"

namespace smoothcert {

inline constexpr int kAbstain = -1;

struct CertificationResult {
  int prediction = kAbstain;  // class label, or kAbstain
  double p_plus_lb = 0.0;     // lower bound on the top-class probability
  double p_minus_ub = 1.0;    // upper bound on any other class (1 - p_plus_lb)
  double radius = 0.0;        // certified L2 radius; 0 when abstained
  int n0 = 0;
  int n = 0;
  double alpha = 0.0;
  double wall_time_ms = 0.0;
  bool correct = false;       // prediction == true_label

  bool abstained() const { return prediction == kAbstain; }
};

// max(0, sigma/2 (phi_inv(p_plus) - phi_inv(p_minus))); bounds are clamped
// 1e-12 away from {0, 1} before taking quantiles.
double certified_radius(double sigma, double p_plus_lb, double p_minus_ub);

// Most frequent label; ties break toward the smallest label.
int majority_vote(std::span<const int> labels);

// Derives one Rng per (phase, sample); certification results then depend only
// on the base seed, not on worker scheduling.
struct SampleStreams {
  std::uint64_t base = 0;

  Rng stream(std::uint64_t phase, std::uint64_t index) const {
    return Rng::substream(base, {phase, index});
  }
};

// Draws n0 pipeline samples (each already vote-reduced to one label), then
// runs an exact two-sided binomial test of the top count against
// top + runner-up at level alpha. Returns the top label, or kAbstain.
int smoothed_predict(std::span<const double> x, PipelineSampler& sampler,
                     const Classifier& g, int n0, double alpha,
                     const SampleStreams& streams, std::uint64_t phase = 0);

// Two-phase certification: smoothed_predict on n0 fresh samples picks the
// candidate, n fresh samples give the Clopper-Pearson lower bound and the
// certified radius. Abstains (radius 0) when the bound is <= 1/2.
CertificationResult certify(std::span<const double> x, int true_label,
                            PipelineSampler& sampler, const Classifier& g,
                            int n0, int n, double alpha,
                            const SampleStreams& streams);

}  // namespace smoothcert

#endif  // SMOOTHCERT_CERTIFY_H_
