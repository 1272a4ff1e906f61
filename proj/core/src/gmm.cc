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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace smoothcert {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

int GmmModel::num_classes() const {
  std::set<int> distinct(labels.begin(), labels.end());
  return static_cast<int>(distinct.size());
}

void GmmModel::validate() const {
  const int K = components();
  if (K < 1) {
    throw std::invalid_argument("gmm needs at least one component");
  }
  if (static_cast<int>(means.size()) != K ||
      static_cast<int>(scales.size()) != K ||
      static_cast<int>(labels.size()) != K) {
    throw std::invalid_argument("gmm field lengths disagree");
  }
  const int d = dim();
  if (d < 1) {
    throw std::invalid_argument("gmm dimension must be >= 1");
  }
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    if (static_cast<int>(means[k].size()) != d) {
      throw std::invalid_argument("gmm means have inconsistent dimensions");
    }
    if (!(weights[k] > 0.0)) {
      throw std::invalid_argument("gmm weights must be positive");
    }
    if (!(scales[k] > 0.0)) {
      throw std::invalid_argument("gmm scales must be positive");
    }
    total += weights[k];
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("gmm weights must sum to 1");
  }
}

void gmm_posterior_mean_into(const GmmModel& gmm, std::span<const double> x_t,
                             double alpha_bar, std::span<double> out) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) {
    throw std::invalid_argument("alpha_bar must lie in (0, 1]");
  }
  const int K = gmm.components();
  const int d = gmm.dim();
  if (static_cast<int>(x_t.size()) != d || static_cast<int>(out.size()) != d) {
    throw std::invalid_argument("gmm posterior mean: dimension mismatch");
  }
  const double sqrt_ab = std::sqrt(alpha_bar);

  // log responsibilities: log w_k + log N(x_t; sqrt_ab mu_k, v_k I) with
  // v_k = ab c_k^2 + 1 - ab.
  double log_resp_stack[16];
  std::vector<double> log_resp_heap;
  double* log_resp = log_resp_stack;
  if (K > 16) {
    log_resp_heap.resize(K);
    log_resp = log_resp_heap.data();
  }
  double max_log = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    const double c = gmm.scales[k];
    const double v = alpha_bar * c * c + (1.0 - alpha_bar);
    const std::vector<double>& mu = gmm.means[k];
    double dist_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double diff = x_t[i] - sqrt_ab * mu[i];
      dist_sq += diff * diff;
    }
    log_resp[k] = std::log(gmm.weights[k]) -
                  0.5 * d * (kLogTwoPi + std::log(v)) - 0.5 * dist_sq / v;
    max_log = std::max(max_log, log_resp[k]);
  }
  double norm = 0.0;
  for (int k = 0; k < K; ++k) {
    log_resp[k] = std::exp(log_resp[k] - max_log);
    norm += log_resp[k];
  }

  std::fill(out.begin(), out.end(), 0.0);
  for (int k = 0; k < K; ++k) {
    const double r = log_resp[k] / norm;
    const double c = gmm.scales[k];
    const double v = alpha_bar * c * c + (1.0 - alpha_bar);
    const double shrink = sqrt_ab * c * c / v;
    const std::vector<double>& mu = gmm.means[k];
    for (int i = 0; i < d; ++i) {
      out[i] += r * (mu[i] + shrink * (x_t[i] - sqrt_ab * mu[i]));
    }
  }
}

std::vector<double> gmm_posterior_mean(const GmmModel& gmm,
                                       std::span<const double> x_t,
                                       double alpha_bar) {
  std::vector<double> out(x_t.size());
  gmm_posterior_mean_into(gmm, x_t, alpha_bar, out);
  return out;
}

namespace {

void write_row(std::ostream& out, std::span<const double> values) {
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    out << (i ? " " : "") << buf;
  }
  out << "\n";
}

}  // namespace

void save_gmm(const GmmModel& gmm, std::ostream& out) {
  gmm.validate();
  out << "gmm " << gmm.components() << " " << gmm.dim() << "\n";
  out << "weights\n";
  write_row(out, gmm.weights);
  out << "means\n";
  for (const auto& mu : gmm.means) {
    write_row(out, mu);
  }
  out << "scales\n";
  write_row(out, gmm.scales);
  out << "labels\n";
  for (int k = 0; k < gmm.components(); ++k) {
    out << (k ? " " : "") << gmm.labels[k];
  }
  out << "\n";
}

void save_gmm_file(const GmmModel& gmm, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  save_gmm(gmm, out);
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

ParseError::ParseError(const std::string& message, int line)
    : std::runtime_error(message + " (line " + std::to_string(line) + ")"),
      line_(line) {}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line; throws when the stream runs out.
  std::string next(const std::string& what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        return line;
      }
    }
    throw ParseError("unexpected end of input, expected " + what, line_no_);
  }

  int line_no() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

std::vector<double> parse_doubles(const std::string& line, int count,
                                  int line_no, const std::string& what) {
  std::istringstream ss(line);
  std::vector<double> values(count);
  for (int i = 0; i < count; ++i) {
    if (!(ss >> values[i])) {
      throw ParseError("expected " + std::to_string(count) + " " + what,
                       line_no);
    }
  }
  return values;
}

}  // namespace

GmmModel load_gmm(std::istream& in) {
  LineReader reader(in);
  std::string header = reader.next("gmm header");
  std::istringstream hs(header);
  std::string tag;
  int K = 0;
  int d = 0;
  if (!(hs >> tag >> K >> d) || tag != "gmm" || K < 1 || d < 1) {
    throw ParseError("malformed gmm header, expected 'gmm K d'",
                     reader.line_no());
  }
  GmmModel gmm;
  if (reader.next("'weights'") != "weights") {
    throw ParseError("expected 'weights' block", reader.line_no());
  }
  gmm.weights = parse_doubles(reader.next("weights"), K, reader.line_no(),
                              "weights");
  if (reader.next("'means'") != "means") {
    throw ParseError("expected 'means' block", reader.line_no());
  }
  gmm.means.resize(K);
  for (int k = 0; k < K; ++k) {
    gmm.means[k] =
        parse_doubles(reader.next("mean row"), d, reader.line_no(), "coords");
  }
  if (reader.next("'scales'") != "scales") {
    throw ParseError("expected 'scales' block", reader.line_no());
  }
  gmm.scales =
      parse_doubles(reader.next("scales"), K, reader.line_no(), "scales");
  if (reader.next("'labels'") != "labels") {
    throw ParseError("expected 'labels' block", reader.line_no());
  }
  {
    std::istringstream ss(reader.next("labels"));
    gmm.labels.resize(K);
    for (int k = 0; k < K; ++k) {
      if (!(ss >> gmm.labels[k])) {
        throw ParseError("expected " + std::to_string(K) + " labels",
                         reader.line_no());
      }
    }
  }
  gmm.validate();
  return gmm;
}

GmmModel load_gmm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open: " + path);
  }
  return load_gmm(in);
}

}  // namespace smoothcert
