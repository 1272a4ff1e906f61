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
//
// Command-line harness: certification sweeps over the pipeline grid, the
// empirical attack check, the oracle battery, and task generation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "smoothcert/certify.h"
#include "smoothcert/dataset.h"
#include "smoothcert/experiment.h"
#include "smoothcert/oracle_check.h"
#include "smoothcert/sampler.h"

namespace {

using namespace smoothcert;

std::string trim_copy(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

ExperimentConfig load_config(const std::string& config_path,
                             const std::vector<std::string>& overrides) {
  ExperimentConfig config;
  if (!config_path.empty()) {
    config = parse_config_file(config_path);
  }
  for (const std::string& entry : overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got: " + entry);
    }
    apply_config_entry(config, trim_copy(entry.substr(0, eq)),
                       trim_copy(entry.substr(eq + 1)));
  }
  return config;
}

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent =
      std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent);
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << content;
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

void dump_trajectories(const ExperimentConfig& config,
                       const std::string& path) {
  const TaskInstance task = build_task(config);
  const NoiseSchedule schedule = build_respaced_schedule(config);
  const GmmDenoiser denoiser(task.gmm, &schedule);
  std::ostringstream out;
  for (const std::string& method_str : config.methods) {
    for (double sigma : config.sigmas) {
      PipelineConfig pipeline;
      pipeline.method = parse_method(method_str);
      pipeline.sigma = sigma;
      pipeline.votes = config.votes.front();
      pipeline.respaced_steps = config.respaced_steps;
      pipeline.noising = config.noising == "exact_match"
                             ? NoisingConvention::kExactMatch
                             : NoisingConvention::kSigmaDirect;
      pipeline.guidance_scale = (pipeline.method == Method::kAdds ||
                                 pipeline.method == Method::kAddsOneShot)
                                    ? config.guidance_scale_for(sigma)
                                    : 0.0;
      PipelineSampler sampler(pipeline, denoiser, schedule);
      Trajectory trajectory;
      std::vector<std::vector<double>> outputs;
      Rng rng = Rng::substream(config.seed, {0xdeb6ULL});
      sampler.sample(task.points.front(), rng, outputs, &trajectory);
      out << "# method " << method_str << " sigma " << sigma << "\n";
      trajectory.write_debug(out);
    }
  }
  write_text_file(path, out.str());
}

int cmd_certify(const ExperimentConfig& config,
                const std::string& trajectory_path) {
  const CertifyTable table = run_certify(config);
  ensure_parent_dir(config.out_csv);
  std::ofstream csv(config.out_csv);
  if (!csv) {
    throw IoError("cannot open for writing: " + config.out_csv);
  }
  write_certify_csv(table.rows, csv);
  if (!csv) {
    throw IoError("write failed: " + config.out_csv);
  }
  write_text_file(config.summary_path(), table.summary_json + "\n");
  if (!trajectory_path.empty()) {
    dump_trajectories(config, trajectory_path);
  }
  std::cout << "wrote " << table.rows.size() << " rows to " << config.out_csv
            << "\nsummary: " << config.summary_path() << "\n";
  return 0;
}

int cmd_attack_check(const ExperimentConfig& config, const std::string& csv,
                     int trials, double fraction, const std::string& out) {
  const std::vector<CertifyRow> rows = read_certify_csv_file(csv);
  const AttackCheckReport report =
      run_attack_check(config, rows, trials, fraction);
  if (!out.empty()) {
    write_text_file(out, report.json + "\n");
  }
  std::cout << report.json << "\n";
  if (report.skipped_rows > 0) {
    std::cerr << "warning: skipped " << report.skipped_rows
              << " unmatched rows\n";
  }
  return 0;
}

int cmd_oracle_check(std::uint64_t seed, const std::string& checks,
                     bool inject_fault) {
  OracleCheckOptions options;
  options.seed = seed;
  options.inject_fault = inject_fault;
  options.checks.clear();
  for (const std::string& part : {checks}) {
    std::istringstream ss(part);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim_copy(item);
      if (!item.empty()) options.checks.push_back(item);
    }
  }
  const std::vector<OracleCheckOutcome> outcomes = run_oracle_checks(options);
  bool all_passed = true;
  for (const OracleCheckOutcome& outcome : outcomes) {
    std::cout << (outcome.passed ? "[PASS] " : "[FAIL] ") << outcome.name
              << ": " << outcome.detail << "\n";
    all_passed = all_passed && outcome.passed;
  }
  return all_passed ? 0 : 3;
}

int cmd_sweep(const ExperimentConfig& config, const std::string& out_json,
              const std::string& out_csv) {
  const SweepResult result = run_sweep(config);
  write_text_file(out_json, result.json + "\n");
  write_text_file(out_csv, result.csv);
  std::cout << "sweep: " << out_json << " and " << out_csv << "\n";
  return 0;
}

int cmd_make_task(int classes, int dim, double separation, double scale,
                  std::uint64_t seed, const std::string& out, int points,
                  const std::string& dataset_out) {
  const GmmModel gmm = make_gmm_task(classes, dim, separation, scale, seed);
  ensure_parent_dir(out);
  save_gmm_file(gmm, out);
  std::cout << "task spec: " << out << "\n";
  if (!dataset_out.empty()) {
    const Dataset dataset = sample_dataset(gmm, points, seed);
    ensure_parent_dir(dataset_out);
    save_dataset_file(dataset, dataset_out);
    std::cout << "dataset: " << dataset_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified robustness via guided diffusion denoised smoothing"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value lines)");
    cmd->add_option("--set", overrides,
                    "override a config entry, e.g. --set n0=100");
  };

  CLI::App* certify_cmd =
      app.add_subcommand("certify", "run the certification grid, emit CSV + "
                                    "summary JSON");
  add_config_options(certify_cmd);
  std::string trajectory_path;
  certify_cmd->add_option("--debug-trajectory", trajectory_path,
                          "dump one trajectory per (method, sigma) cell");

  CLI::App* attack_cmd = app.add_subcommand(
      "attack-check", "re-estimate certified rows under perturbations of "
                      "norm fraction * radius");
  add_config_options(attack_cmd);
  std::string attack_csv = "certify.csv";
  int attack_trials = 200;
  double attack_fraction = 0.99;
  std::string attack_out;
  attack_cmd->add_option("--csv", attack_csv, "certify CSV to check");
  attack_cmd->add_option("--trials", attack_trials, "trials per certified row");
  attack_cmd->add_option("--fraction", attack_fraction,
                         "perturbation norm as a fraction of the radius");
  attack_cmd->add_option("--out", attack_out, "report JSON path");

  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check", "verify every formula against its independent oracle");
  std::uint64_t oracle_seed = 17;
  std::string oracle_checks = "all";
  bool inject_fault = false;
  oracle_cmd->add_option("--seed", oracle_seed, "battery seed");
  oracle_cmd->add_option("--checks", oracle_checks,
                         "comma list of checks, or 'all'");
  oracle_cmd->add_flag("--inject-fault", inject_fault,
                       "negative control: perturb the ledger replay constant");

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "grid over guidance scales and step counts");
  add_config_options(sweep_cmd);
  std::string sweep_json = "sweep.json";
  std::string sweep_csv = "sweep.csv";
  sweep_cmd->add_option("--out", sweep_json, "sweep JSON path");
  sweep_cmd->add_option("--csv-out", sweep_csv, "curve data CSV path");

  CLI::App* task_cmd =
      app.add_subcommand("make-task", "generate a GMM task spec");
  int task_classes = 3;
  int task_dim = 2;
  double task_separation = 4.0;
  double task_scale = 0.5;
  std::uint64_t task_seed = 7;
  int task_points = 250;
  std::string task_out = "task.gmm";
  std::string task_dataset_out;
  task_cmd->add_option("--classes", task_classes, "number of classes");
  task_cmd->add_option("--dim", task_dim, "input dimension");
  task_cmd->add_option("--separation", task_separation, "mean sphere radius");
  task_cmd->add_option("--scale", task_scale, "per-class std");
  task_cmd->add_option("--seed", task_seed, "task seed");
  task_cmd->add_option("--out", task_out, "gmm spec path");
  task_cmd->add_option("--points", task_points, "dataset size");
  task_cmd->add_option("--dataset-out", task_dataset_out,
                       "also sample and save a dataset");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(certify_cmd)) {
      return cmd_certify(load_config(config_path, overrides), trajectory_path);
    }
    if (app.got_subcommand(attack_cmd)) {
      return cmd_attack_check(load_config(config_path, overrides), attack_csv,
                              attack_trials, attack_fraction, attack_out);
    }
    if (app.got_subcommand(oracle_cmd)) {
      return cmd_oracle_check(oracle_seed, oracle_checks, inject_fault);
    }
    if (app.got_subcommand(sweep_cmd)) {
      return cmd_sweep(load_config(config_path, overrides), sweep_json,
                       sweep_csv);
    }
    if (app.got_subcommand(task_cmd)) {
      return cmd_make_task(task_classes, task_dim, task_separation, task_scale,
                           task_seed, task_out, task_points, task_dataset_out);
    }
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
