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

#include "smoothcert/certify.h"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <vector>

#include "smoothcert/stats.h"

namespace smoothcert {

double certified_radius(double sigma, double p_plus_lb, double p_minus_ub) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  if (!(p_plus_lb >= 0.0 && p_plus_lb <= 1.0 && p_minus_ub >= 0.0 &&
        p_minus_ub <= 1.0)) {
    throw std::invalid_argument("probability bounds must lie in [0, 1]");
  }
  const double p_plus = std::clamp(p_plus_lb, 1e-12, 1.0 - 1e-12);
  const double p_minus = std::clamp(p_minus_ub, 1e-12, 1.0 - 1e-12);
  const double r = 0.5 * sigma * (phi_inv(p_plus) - phi_inv(p_minus));
  return std::max(0.0, r);
}

int majority_vote(std::span<const int> labels) {
  if (labels.empty()) {
    throw std::invalid_argument("majority_vote requires at least one label");
  }
  int max_label = 0;
  for (int label : labels) {
    if (label < 0) {
      throw std::invalid_argument("labels must be nonnegative");
    }
    max_label = std::max(max_label, label);
  }
  std::vector<int> counts(max_label + 1, 0);
  for (int label : labels) {
    ++counts[label];
  }
  int best = 0;
  for (int label = 1; label <= max_label; ++label) {
    if (counts[label] > counts[best]) {
      best = label;  // strict: ties keep the smaller label
    }
  }
  return best;
}

namespace {

// Label histogram over n samples; labels are small nonnegative class ids.
void count_labels(std::span<const double> x, PipelineSampler& sampler,
                  const Classifier& g, int n, const SampleStreams& streams,
                  std::uint64_t phase, std::vector<int>& counts) {
  counts.clear();
  for (int j = 0; j < n; ++j) {
    Rng rng = streams.stream(phase, static_cast<std::uint64_t>(j));
    const int label = sampler.sample_label(x, rng, g);
    if (label < 0) {
      throw std::invalid_argument("classifier returned a negative label");
    }
    if (label >= static_cast<int>(counts.size())) {
      counts.resize(label + 1, 0);
    }
    ++counts[label];
  }
}

}  // namespace

int smoothed_predict(std::span<const double> x, PipelineSampler& sampler,
                     const Classifier& g, int n0, double alpha,
                     const SampleStreams& streams, std::uint64_t phase) {
  if (n0 < 1) {
    throw std::invalid_argument("n0 must be >= 1");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  std::vector<int> counts;
  count_labels(x, sampler, g, n0, streams, phase, counts);
  int top = 0;
  int second = -1;
  for (int label = 1; label < static_cast<int>(counts.size()); ++label) {
    if (counts[label] > counts[top]) {
      second = top;
      top = label;
    } else if (second < 0 || counts[label] > counts[second]) {
      second = label;
    }
  }
  const int top_count = counts[top];
  const int second_count = second < 0 ? 0 : counts[second];
  const double p_value =
      binomial_two_sided_pvalue(top_count, top_count + second_count);
  return p_value <= alpha ? top : kAbstain;
}

CertificationResult certify(std::span<const double> x, int true_label,
                            PipelineSampler& sampler, const Classifier& g,
                            int n0, int n, double alpha,
                            const SampleStreams& streams) {
  if (n < n0 || n0 < 1) {
    throw std::invalid_argument("need n >= n0 >= 1");
  }
  const auto start = std::chrono::steady_clock::now();
  CertificationResult result;
  result.n0 = n0;
  result.n = n;
  result.alpha = alpha;

  const int guess = smoothed_predict(x, sampler, g, n0, alpha, streams,
                                     /*phase=*/0);
  if (guess != kAbstain) {
    int hits = 0;
    for (int j = 0; j < n; ++j) {
      Rng rng = streams.stream(1, static_cast<std::uint64_t>(j));
      if (sampler.sample_label(x, rng, g) == guess) {
        ++hits;
      }
    }
    result.p_plus_lb = clopper_pearson_lower(hits, n, alpha);
    result.p_minus_ub = 1.0 - result.p_plus_lb;
    if (result.p_plus_lb > 0.5) {
      result.prediction = guess;
      result.radius = certified_radius(sampler.config().sigma,
                                       result.p_plus_lb, result.p_minus_ub);
    }
  }
  result.correct = result.prediction == true_label;
  const auto end = std::chrono::steady_clock::now();
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(end - start).count();
  return result;
}

}  // namespace smoothcert
