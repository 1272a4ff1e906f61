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

#ifndef SMOOTHCERT_DATASET_H_
#define SMOOTHCERT_DATASET_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smoothcert/classifier.h"
#include "smoothcert/gmm.h"

namespace smoothcert {

// Labeled points drawn from a GmmModel, together with the generator itself so
// the matched denoiser and Bayes classifier can be rebuilt from the file.
struct Dataset {
  std::vector<std::vector<double>> points;
  std::vector<int> labels;
  GmmModel generator;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(points.size()); }
  int dim() const { return points.empty() ? generator.dim()
                                          : static_cast<int>(points[0].size()); }
};

// Equal-weight mixture with means on a sphere of radius `separation`,
// isotropic std `scale`, labels 0..K-1. Deterministic in seed.
GmmModel make_gmm_task(int num_classes, int dim, double separation,
                       double scale, std::uint64_t seed);

// Bayes-optimal label under the mixture: argmax over components of
// log w_k + log N(x; mu_k, c_k^2 I); ties break toward the smaller label.
int bayes_classify(const GmmModel& gmm, std::span<const double> x);

// Classifier-interface wrapper around bayes_classify with per-component
// constants precomputed.
class BayesClassifier : public Classifier {
 public:
  explicit BayesClassifier(GmmModel gmm);
  int classify(std::span<const double> x) const override;

 private:
  GmmModel gmm_;
  std::vector<double> log_prior_;   // log w_k - d log c_k
  std::vector<double> inv_two_c2_;  // 1 / (2 c_k^2)
};

Dataset sample_dataset(const GmmModel& gmm, int n, std::uint64_t seed);

// Text format: "dataset n d K seed", the embedded generator spec, then one
// "x_1 ... x_d label" line per point at 17 significant digits. Round trips
// are bitwise lossless.
void save_dataset(const Dataset& dataset, std::ostream& out);
void save_dataset_file(const Dataset& dataset, const std::string& path);
Dataset load_dataset(std::istream& in);
Dataset load_dataset_file(const std::string& path);

}  // namespace smoothcert

#endif  // SMOOTHCERT_DATASET_H_
