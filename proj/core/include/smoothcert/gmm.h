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

#ifndef SMOOTHCERT_GMM_H_
#define SMOOTHCERT_GMM_H_

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace smoothcert {

// Isotropic Gaussian mixture with one class label per component. Serves as
// both the data distribution and, through the exact posterior mean, the
// denoiser for that distribution.
struct GmmModel {
  std::vector<double> weights;            // K weights summing to 1
  std::vector<std::vector<double>> means; // K means of dimension d
  std::vector<double> scales;             // K per-component std devs, > 0
  std::vector<int> labels;                // K class labels

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
  int num_classes() const;

  // Throws std::invalid_argument when shapes or invariants are violated
  // (weights sum to 1 within 1e-12, all weights and scales positive).
  void validate() const;
};

// E[x0 | x_t] under x_t = sqrt(ab) x0 + sqrt(1 - ab) eps with x0 ~ gmm.
// Component responsibilities are computed in log space.
std::vector<double> gmm_posterior_mean(const GmmModel& gmm,
                                       std::span<const double> x_t,
                                       double alpha_bar);

// Allocation-free form used by the sampler hot path.
void gmm_posterior_mean_into(const GmmModel& gmm, std::span<const double> x_t,
                             double alpha_bar, std::span<double> out);

// Plain-text model spec: labeled blocks for weights, means, scales, labels.
void save_gmm(const GmmModel& gmm, std::ostream& out);
void save_gmm_file(const GmmModel& gmm, const std::string& path);
GmmModel load_gmm(std::istream& in);
GmmModel load_gmm_file(const std::string& path);

// Parse failure carrying the 1-based line number of the offending input.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line);
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace smoothcert

#endif  // SMOOTHCERT_GMM_H_
