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

#ifndef SMOOTHCERT_EXPERIMENT_H_
#define SMOOTHCERT_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "smoothcert/dataset.h"
#include "smoothcert/sampler.h"

namespace smoothcert {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Experiment description; parsed from a key = value config file, with CLI
// overrides applied on top. The pipeline grid is methods x sigmas x votes.
struct ExperimentConfig {
  // Task: either a gmm spec file, a pre-sampled dataset, or generation params.
  std::string task_file;
  std::string dataset_file;
  int classes = 3;
  int dim = 2;
  double separation = 4.0;
  double class_scale = 0.5;
  std::uint64_t task_seed = 7;

  // Schedule.
  int timesteps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int respaced_steps = 20;

  // Pipeline grid.
  std::vector<std::string> methods = {"rs", "dds", "densepure", "adds",
                                      "adds_oneshot"};
  std::vector<double> sigmas = {1.0, 1.5, 2.0};
  std::vector<int> votes = {1, 5};
  // One value broadcast to every sigma, or one value per sigma.
  std::vector<double> guidance_scales = {0.8};
  std::string noising = "sigma_direct";
  bool independent_votes = false;

  // Certification.
  int n0 = 1000;
  int n = 10000;
  double alpha = 0.001;
  int num_test_points = 250;
  std::uint64_t seed = 1;
  std::vector<double> radius_grid_fractions = {0.0, 0.25, 0.5, 0.75, 1.0,
                                               1.25, 1.5, 1.75, 2.0};

  // Sweep grids; empty entries fall back to the single configured value.
  std::vector<double> sweep_scales;
  std::vector<int> sweep_steps;

  // Output.
  std::string out_csv = "certify.csv";
  std::string out_summary;  // default: out_csv + ".summary.json"
  int workers = 0;          // 0: SMOOTHCERT_WORKERS env, else hardware

  void validate() const;
  std::string summary_path() const;
  double guidance_scale_for(double sigma) const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
// Applies one "key = value" assignment; shared by the file parser and the
// CLI's --set overrides.
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

// Materialized task: mixture, sampled test points, matched denoiser inputs.
struct TaskInstance {
  GmmModel gmm;
  std::vector<std::vector<double>> points;
  std::vector<int> labels;
};
TaskInstance build_task(const ExperimentConfig& config);
NoiseSchedule build_respaced_schedule(const ExperimentConfig& config);

// One certification outcome, mirroring the CSV schema.
struct CertifyRow {
  int sample_id = 0;
  std::string method;
  double sigma = 0.0;
  int votes = 1;
  double guidance_scale = 0.0;
  int prediction = -1;  // kAbstain
  int true_label = 0;
  bool correct = false;
  bool abstained = true;
  double p_lower = 0.0;
  double radius = 0.0;
  int n0 = 0;
  int n = 0;
  double alpha = 0.0;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;
};

struct CertifyTable {
  std::vector<CertifyRow> rows;
  std::string summary_json;  // deterministic given config + seed
};

// Runs the full grid; rows come back in (point, method-cell) order regardless
// of worker count.
CertifyTable run_certify(const ExperimentConfig& config);

void write_certify_csv(const std::vector<CertifyRow>& rows, std::ostream& out);
std::vector<CertifyRow> read_certify_csv(std::istream& in);
std::vector<CertifyRow> read_certify_csv_file(const std::string& path);

// Empirical soundness check of the certificates: random perturbations of norm
// fraction * radius, prediction re-estimated with n0 samples per trial.
struct AttackMethodStat {
  std::string method;
  double sigma = 0.0;
  int votes = 1;
  int points = 0;
  long long trials = 0;
  long long flips = 0;
  double flip_rate = 0.0;
  double flip_rate_stderr = 0.0;
};

struct AttackCheckReport {
  std::vector<AttackMethodStat> methods;
  long long total_trials = 0;
  long long total_flips = 0;
  double overall_flip_rate = 0.0;
  int skipped_rows = 0;
  std::string json;
};

AttackCheckReport run_attack_check(const ExperimentConfig& config,
                                   const std::vector<CertifyRow>& rows,
                                   int trials_per_point, double fraction);

// Sweep over guidance scales and respaced step counts; each cell carries the
// same summary object cmd_certify would emit.
struct SweepResult {
  std::string json;  // array of {guidance_scale, respaced_steps, summary}
  std::string csv;   // flat accuracy-vs-radius curve data
};
SweepResult run_sweep(const ExperimentConfig& config);

int resolve_workers(int configured);
// Deterministic-output parallel loop: fn(i) must write only to slot i state.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace smoothcert

#endif  // SMOOTHCERT_EXPERIMENT_H_
