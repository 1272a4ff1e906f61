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

#include "smoothcert/dataset.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "smoothcert/rng.h"

namespace smoothcert {

GmmModel make_gmm_task(int num_classes, int dim, double separation,
                       double scale, std::uint64_t seed) {
  if (num_classes < 2) {
    throw std::invalid_argument("need at least two classes");
  }
  if (dim < 1) {
    throw std::invalid_argument("dimension must be >= 1");
  }
  if (!(separation > 0.0 && scale > 0.0)) {
    throw std::invalid_argument("separation and scale must be positive");
  }
  GmmModel gmm;
  gmm.weights.assign(num_classes, 1.0 / num_classes);
  gmm.scales.assign(num_classes, scale);
  gmm.means.resize(num_classes);
  gmm.labels.resize(num_classes);
  Rng rng = Rng::substream(seed, {0x7a5bULL});
  // Rejection-sample the directions so no two class means collapse onto each
  // other; the chord threshold shrinks with the class count so placement
  // always succeeds.
  const double min_chord =
      std::min(1.0, 2.0 * std::sin(M_PI / (2.0 * num_classes)));
  std::vector<double> candidate(dim);
  for (int k = 0; k < num_classes; ++k) {
    double best_gap = -1.0;
    for (int attempt = 0; attempt < 200; ++attempt) {
      rng.fill_unit_direction(candidate);
      double gap = 2.0;
      for (int j = 0; j < k; ++j) {
        double dist_sq = 0.0;
        for (int i = 0; i < dim; ++i) {
          const double diff = candidate[i] - gmm.means[j][i] / separation;
          dist_sq += diff * diff;
        }
        gap = std::min(gap, std::sqrt(dist_sq));
      }
      if (gap > best_gap) {
        best_gap = gap;
        gmm.means[k] = candidate;
      }
      if (best_gap >= min_chord) break;
    }
    for (double& v : gmm.means[k]) {
      v *= separation;
    }
    gmm.labels[k] = k;
  }
  gmm.validate();
  return gmm;
}

int bayes_classify(const GmmModel& gmm, std::span<const double> x) {
  return BayesClassifier(gmm).classify(x);
}

BayesClassifier::BayesClassifier(GmmModel gmm) : gmm_(std::move(gmm)) {
  gmm_.validate();
  const int K = gmm_.components();
  const int d = gmm_.dim();
  log_prior_.resize(K);
  inv_two_c2_.resize(K);
  for (int k = 0; k < K; ++k) {
    const double c = gmm_.scales[k];
    log_prior_[k] = std::log(gmm_.weights[k]) - d * std::log(c);
    inv_two_c2_[k] = 0.5 / (c * c);
  }
}

int BayesClassifier::classify(std::span<const double> x) const {
  const int K = gmm_.components();
  const int d = gmm_.dim();
  if (static_cast<int>(x.size()) != d) {
    throw std::invalid_argument("classifier input dimension mismatch");
  }
  double best_score = 0.0;
  int best_label = -1;
  for (int k = 0; k < K; ++k) {
    const std::vector<double>& mu = gmm_.means[k];
    double dist_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double diff = x[i] - mu[i];
      dist_sq += diff * diff;
    }
    const double score = log_prior_[k] - dist_sq * inv_two_c2_[k];
    if (best_label < 0 || score > best_score ||
        (score == best_score && gmm_.labels[k] < best_label)) {
      best_score = score;
      best_label = gmm_.labels[k];
    }
  }
  return best_label;
}

Dataset sample_dataset(const GmmModel& gmm, int n, std::uint64_t seed) {
  gmm.validate();
  if (n < 1) {
    throw std::invalid_argument("dataset size must be >= 1");
  }
  Dataset dataset;
  dataset.generator = gmm;
  dataset.seed = seed;
  dataset.points.resize(n);
  dataset.labels.resize(n);
  const int d = gmm.dim();
  Rng rng = Rng::substream(seed, {0xda7aULL});
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    int k = 0;
    double acc = gmm.weights[0];
    while (u >= acc && k + 1 < gmm.components()) {
      ++k;
      acc += gmm.weights[k];
    }
    dataset.points[i].resize(d);
    rng.fill_gaussian(dataset.points[i]);
    for (int j = 0; j < d; ++j) {
      dataset.points[i][j] =
          gmm.means[k][j] + gmm.scales[k] * dataset.points[i][j];
    }
    dataset.labels[i] = gmm.labels[k];
  }
  return dataset;
}

void save_dataset(const Dataset& dataset, std::ostream& out) {
  out << "dataset " << dataset.size() << " " << dataset.dim() << " "
      << dataset.generator.components() << " " << dataset.seed << "\n";
  save_gmm(dataset.generator, out);
  out << "points\n";
  char buf[32];
  for (int i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.points[i]) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << " ";
    }
    out << dataset.labels[i] << "\n";
  }
}

void save_dataset_file(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  save_dataset(dataset, out);
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

Dataset load_dataset(std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  if (line.empty()) {
    throw ParseError("empty dataset file", line_no);
  }
  std::istringstream header(line);
  std::string tag;
  int n = 0;
  int d = 0;
  int K = 0;
  std::uint64_t seed = 0;
  if (!(header >> tag >> n >> d >> K >> seed) || tag != "dataset" || n < 1 ||
      d < 1 || K < 1) {
    throw ParseError("malformed dataset header, expected 'dataset n d K seed'",
                     line_no);
  }
  Dataset dataset;
  dataset.seed = seed;
  dataset.generator = load_gmm(in);
  if (dataset.generator.dim() != d ||
      dataset.generator.components() != K) {
    throw ParseError("dataset header disagrees with embedded generator",
                     line_no);
  }
  // The gmm loader consumed up to its last block; continue with points.
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    break;
  }
  if (line != "points") {
    throw ParseError("expected 'points' block", line_no);
  }
  dataset.points.resize(n);
  dataset.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("unexpected end of points", line_no);
    }
    ++line_no;
    std::istringstream row(line);
    dataset.points[i].resize(d);
    for (int j = 0; j < d; ++j) {
      if (!(row >> dataset.points[i][j])) {
        throw ParseError("expected " + std::to_string(d) + " coordinates",
                         line_no);
      }
    }
    if (!(row >> dataset.labels[i])) {
      throw ParseError("expected a label after the coordinates", line_no);
    }
  }
  return dataset;
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open: " + path);
  }
  return load_dataset(in);
}

}  // namespace smoothcert
