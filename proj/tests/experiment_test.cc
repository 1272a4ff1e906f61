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

#include "smoothcert/experiment.h"

#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "smoothcert/oracle_check.h"

using namespace smoothcert;
using nlohmann::json;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.num_test_points = 3;
  config.n0 = 20;
  config.n = 60;
  config.alpha = 0.01;
  config.methods = {"rs", "adds"};
  config.sigmas = {1.0};
  config.votes = {1};
  config.guidance_scales = {0.8};
  config.separation = 4.0;
  config.class_scale = 0.5;
  config.seed = 11;
  return config;
}

bool rows_equal_ignoring_time(const std::vector<CertifyRow>& a,
                              const std::vector<CertifyRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].sample_id != b[i].sample_id || a[i].method != b[i].method ||
        a[i].sigma != b[i].sigma || a[i].votes != b[i].votes ||
        a[i].guidance_scale != b[i].guidance_scale ||
        a[i].prediction != b[i].prediction ||
        a[i].true_label != b[i].true_label || a[i].correct != b[i].correct ||
        a[i].abstained != b[i].abstained || a[i].p_lower != b[i].p_lower ||
        a[i].radius != b[i].radius || a[i].n0 != b[i].n0 ||
        a[i].n != b[i].n || a[i].alpha != b[i].alpha ||
        a[i].seed != b[i].seed) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("config files parse with comments and validate") {
  std::stringstream in(
      "# comment\n"
      "n0 = 25\n"
      "n = 100   # inline comment\n"
      "methods = rs, dds\n"
      "sigmas = 0.5, 1.0\n"
      "guidance_scales = 0.8, 0.9\n"
      "votes = 1\n"
      "seed = 99\n");
  const ExperimentConfig config = parse_config(in);
  CHECK(config.n0 == 25);
  CHECK(config.n == 100);
  CHECK(config.methods == std::vector<std::string>{"rs", "dds"});
  CHECK(config.sigmas == std::vector<double>{0.5, 1.0});
  CHECK(config.seed == 99);
  config.validate();

  std::stringstream bad_key("nonsense = 3\n");
  CHECK_THROWS_AS(parse_config(bad_key), ConfigError);
  std::stringstream bad_value("n0 = abc\n");
  CHECK_THROWS_AS(parse_config(bad_value), ConfigError);
  std::stringstream no_equals("n0 100\n");
  CHECK_THROWS_AS(parse_config(no_equals), ConfigError);

  ExperimentConfig invalid = tiny_config();
  invalid.methods = {"bogus"};
  CHECK_THROWS_AS(invalid.validate(), std::invalid_argument);
  invalid = tiny_config();
  invalid.guidance_scales = {0.8, 0.9, 0.7};
  CHECK_THROWS_AS(invalid.validate(), ConfigError);
  invalid = tiny_config();
  invalid.respaced_steps = 2000;
  CHECK_THROWS_AS(invalid.validate(), ConfigError);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/certify.conf"), IoError);
}

TEST_CASE("per-sigma guidance scales resolve by position") {
  ExperimentConfig config = tiny_config();
  config.sigmas = {1.0, 2.0};
  config.guidance_scales = {0.8, 0.9};
  CHECK(config.guidance_scale_for(1.0) == 0.8);
  CHECK(config.guidance_scale_for(2.0) == 0.9);
  config.guidance_scales = {0.7};
  CHECK(config.guidance_scale_for(2.0) == 0.7);
}

TEST_CASE("run_certify fills the grid in deterministic order") {
  const ExperimentConfig config = tiny_config();
  const CertifyTable table = run_certify(config);
  REQUIRE(table.rows.size() == 3 * 2);  // points x (methods x sigmas x votes)
  for (int point = 0; point < 3; ++point) {
    CHECK(table.rows[2 * point].sample_id == point);
    CHECK(table.rows[2 * point].method == "rs");
    CHECK(table.rows[2 * point + 1].method == "adds");
    CHECK(table.rows[2 * point + 1].guidance_scale == 0.8);
    CHECK(table.rows[2 * point].guidance_scale == 0.0);
  }
  for (const CertifyRow& row : table.rows) {
    CHECK(row.n0 == 20);
    CHECK(row.n == 60);
    CHECK(row.alpha == 0.01);
    CHECK(row.seed == 11);
    CHECK(row.wall_time_ms >= 0.0);
    CHECK(row.abstained == (row.prediction == -1));
  }
}

TEST_CASE("certification output is reproducible and worker-independent") {
  ExperimentConfig config = tiny_config();
  config.workers = 1;
  const CertifyTable serial = run_certify(config);
  config.workers = 3;
  const CertifyTable parallel = run_certify(config);
  CHECK(rows_equal_ignoring_time(serial.rows, parallel.rows));
  CHECK(serial.summary_json == parallel.summary_json);
  const CertifyTable again = run_certify(config);
  CHECK(rows_equal_ignoring_time(parallel.rows, again.rows));
}

TEST_CASE("summary aggregates match the rows and curves are monotone") {
  const ExperimentConfig config = tiny_config();
  const CertifyTable table = run_certify(config);
  const json summary = json::parse(table.summary_json);
  REQUIRE(summary.at("cells").size() == 2);
  for (const json& cell : summary.at("cells")) {
    const std::string method = cell.at("method").get<std::string>();
    int clean = 0;
    int certified_at_zero = 0;
    for (const CertifyRow& row : table.rows) {
      if (row.method != method) continue;
      clean += row.correct ? 1 : 0;
      certified_at_zero +=
          (row.correct && !row.abstained && row.radius >= 0.0) ? 1 : 0;
    }
    CHECK(cell.at("clean_accuracy").get<double>() ==
          doctest::Approx(clean / 3.0).epsilon(1e-12));
    const json& curve = cell.at("certified_accuracy");
    REQUIRE(!curve.empty());
    CHECK(curve[0].at("r").get<double>() == 0.0);
    CHECK(curve[0].at("certified_accuracy").get<double>() ==
          doctest::Approx(certified_at_zero / 3.0).epsilon(1e-12));
    double prev = 2.0;
    for (const json& pt : curve) {
      const double acc = pt.at("certified_accuracy").get<double>();
      CHECK(acc <= prev + 1e-12);
      prev = acc;
    }
  }
}

TEST_CASE("certify CSV round trips") {
  const ExperimentConfig config = tiny_config();
  const CertifyTable table = run_certify(config);
  std::stringstream stream;
  write_certify_csv(table.rows, stream);
  const std::vector<CertifyRow> parsed = read_certify_csv(stream);
  REQUIRE(parsed.size() == table.rows.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].sample_id == table.rows[i].sample_id);
    CHECK(parsed[i].method == table.rows[i].method);
    CHECK(parsed[i].sigma == table.rows[i].sigma);
    CHECK(parsed[i].prediction == table.rows[i].prediction);
    CHECK(parsed[i].p_lower == table.rows[i].p_lower);
    CHECK(parsed[i].radius == table.rows[i].radius);
    CHECK(parsed[i].seed == table.rows[i].seed);
  }
  std::stringstream empty;
  CHECK_THROWS_AS(read_certify_csv(empty), IoError);
  std::stringstream bad("header\n1,2,3\n");
  CHECK_THROWS_AS(read_certify_csv(bad), IoError);
}

TEST_CASE("attack check: tiny perturbations never flip an easy task") {
  ExperimentConfig config = tiny_config();
  config.methods = {"adds"};
  config.n0 = 40;
  config.n = 120;
  const CertifyTable table = run_certify(config);
  int certified = 0;
  for (const CertifyRow& row : table.rows) {
    certified += row.abstained ? 0 : 1;
  }
  REQUIRE(certified > 0);
  const AttackCheckReport report =
      run_attack_check(config, table.rows, /*trials_per_point=*/5,
                       /*fraction=*/1e-9);
  CHECK(report.total_trials == certified * 5);
  CHECK(report.total_flips == 0);
  CHECK(report.skipped_rows == 0);
  REQUIRE(!report.methods.empty());
  CHECK(report.methods[0].flip_rate == 0.0);
  const json parsed = json::parse(report.json);
  CHECK(parsed.at("fraction").get<double>() == 1e-9);
  CHECK(parsed.at("methods").size() == report.methods.size());
}

TEST_CASE("attack check skips unmatched rows and excludes abstentions") {
  ExperimentConfig config = tiny_config();
  config.methods = {"rs"};
  const CertifyTable table = run_certify(config);
  std::vector<CertifyRow> rows = table.rows;
  // An abstained row: silently excluded.
  CertifyRow abstained = rows[0];
  abstained.abstained = true;
  abstained.prediction = -1;
  abstained.radius = 0.0;
  rows.push_back(abstained);
  // A row pointing past the dataset: skipped with a warning count.
  CertifyRow out_of_range = rows[0];
  out_of_range.sample_id = 999;
  rows.push_back(out_of_range);
  // An unknown method: skipped.
  CertifyRow strange = rows[0];
  strange.method = "mystery";
  rows.push_back(strange);

  const AttackCheckReport report =
      run_attack_check(config, rows, /*trials_per_point=*/2,
                       /*fraction=*/1e-9);
  CHECK(report.skipped_rows == 2);
  long long expected_trials = 0;
  for (const CertifyRow& row : table.rows) {
    expected_trials += row.abstained ? 0 : 2;
  }
  CHECK(report.total_trials == expected_trials);

  CHECK_THROWS_AS(run_attack_check(config, rows, 0, 0.5), ConfigError);
  CHECK_THROWS_AS(run_attack_check(config, rows, 5, 1.5), ConfigError);
}

TEST_CASE("single-cell sweep reproduces the certify summary") {
  ExperimentConfig config = tiny_config();
  config.sweep_scales = {0.8};
  config.sweep_steps = {config.respaced_steps};
  const SweepResult sweep = run_sweep(config);
  const CertifyTable direct = run_certify(config);
  const json sweep_json = json::parse(sweep.json);
  REQUIRE(sweep_json.size() == 1);
  CHECK(sweep_json[0].at("guidance_scale").get<double>() == 0.8);
  CHECK(sweep_json[0].at("summary") == json::parse(direct.summary_json));
  // Curve CSV has one line per (cell, radius grid point) plus a header.
  std::istringstream csv(sweep.csv);
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  const json summary = json::parse(direct.summary_json);
  int expected = 1;
  for (const json& cell : summary.at("cells")) {
    expected += static_cast<int>(cell.at("certified_accuracy").size());
  }
  CHECK(lines == expected);
}

TEST_CASE("oracle battery rejects an empty selection") {
  OracleCheckOptions options;
  options.checks = {};
  CHECK_THROWS_AS(run_oracle_checks(options), std::invalid_argument);
  options.checks = {"no_such_check"};
  CHECK_THROWS_AS(run_oracle_checks(options), std::invalid_argument);
  options.checks = {"step_identity"};
  const std::vector<OracleCheckOutcome> outcomes = run_oracle_checks(options);
  REQUIRE(outcomes.size() == 1);
  CHECK(outcomes[0].passed);
}

TEST_CASE("worker resolution and the parallel loop contract") {
  CHECK(resolve_workers(4) == 4);
  CHECK(resolve_workers(0) >= 1);
  std::vector<int> slots(64, 0);
  parallel_for(64, 3, [&](int i) { slots[i] = i * i; });
  for (int i = 0; i < 64; ++i) {
    CHECK(slots[i] == i * i);
  }
  CHECK_THROWS_AS(
      parallel_for(16, 2, [](int) { throw std::runtime_error("boom"); }),
      std::runtime_error);
}
