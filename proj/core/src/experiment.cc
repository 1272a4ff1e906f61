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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "smoothcert/certify.h"

namespace smoothcert {

using nlohmann::json;

namespace {

// Substream tags; every derived stream hangs off (master seed, tag, ...).
constexpr std::uint64_t kStreamPoints = 2;
constexpr std::uint64_t kStreamCertify = 3;
constexpr std::uint64_t kStreamAttack = 4;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) {
    parts.push_back(item);
  }
  return parts;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for '" + key + "': " + value);
  }
}

long long parse_int(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer value for '" + key + "': " + value);
  }
}

std::vector<double> parse_double_list(const std::string& value,
                                      const std::string& key) {
  std::vector<double> out;
  for (const std::string& part : split(value, ',')) {
    const std::string item = trim(part);
    if (item.empty()) continue;
    out.push_back(parse_double(item, key));
  }
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

std::vector<int> parse_int_list(const std::string& value,
                                const std::string& key) {
  std::vector<int> out;
  for (const std::string& part : split(value, ',')) {
    const std::string item = trim(part);
    if (item.empty()) continue;
    out.push_back(static_cast<int>(parse_int(item, key)));
  }
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean for '" + key + "': " + value);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (num_test_points < 1) throw ConfigError("num_test_points must be >= 1");
  if (n0 < 1 || n < n0) throw ConfigError("need n >= n0 >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (timesteps < 1) throw ConfigError("timesteps must be >= 1");
  if (respaced_steps < 1 || respaced_steps > timesteps) {
    throw ConfigError("need 1 <= respaced_steps <= timesteps");
  }
  if (methods.empty()) throw ConfigError("methods list is empty");
  for (const std::string& m : methods) {
    parse_method(m);  // throws on unknown names
  }
  if (sigmas.empty()) throw ConfigError("sigmas list is empty");
  for (double s : sigmas) {
    if (!(s > 0.0)) throw ConfigError("sigmas must be positive");
  }
  if (votes.empty()) throw ConfigError("votes list is empty");
  for (int v : votes) {
    if (v < 1) throw ConfigError("votes must be >= 1");
  }
  if (guidance_scales.size() != 1 &&
      guidance_scales.size() != sigmas.size()) {
    throw ConfigError(
        "guidance_scales must hold one value or one value per sigma");
  }
  for (double s : guidance_scales) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ConfigError("guidance scales must lie in [0, 1]");
    }
  }
  if (noising != "sigma_direct" && noising != "exact_match") {
    throw ConfigError("noising must be sigma_direct or exact_match");
  }
  if (task_file.empty() && dataset_file.empty()) {
    if (classes < 2) throw ConfigError("classes must be >= 2");
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (!(separation > 0.0 && class_scale > 0.0)) {
      throw ConfigError("separation and class_scale must be positive");
    }
  }
  for (double f : radius_grid_fractions) {
    if (f < 0.0) throw ConfigError("radius grid fractions must be >= 0");
  }
  if (out_csv.empty()) throw ConfigError("out_csv must be set");
}

std::string ExperimentConfig::summary_path() const {
  return out_summary.empty() ? out_csv + ".summary.json" : out_summary;
}

double ExperimentConfig::guidance_scale_for(double sigma) const {
  if (guidance_scales.size() == 1) return guidance_scales[0];
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (sigmas[i] == sigma) return guidance_scales[i];
  }
  throw ConfigError("no guidance scale configured for the requested sigma");
}

void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "task_file") config.task_file = value;
  else if (key == "dataset_file") config.dataset_file = value;
  else if (key == "classes") config.classes = static_cast<int>(parse_int(value, key));
  else if (key == "dim") config.dim = static_cast<int>(parse_int(value, key));
  else if (key == "separation") config.separation = parse_double(value, key);
  else if (key == "class_scale") config.class_scale = parse_double(value, key);
  else if (key == "task_seed") config.task_seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "timesteps") config.timesteps = static_cast<int>(parse_int(value, key));
  else if (key == "beta_start") config.beta_start = parse_double(value, key);
  else if (key == "beta_end") config.beta_end = parse_double(value, key);
  else if (key == "respaced_steps") config.respaced_steps = static_cast<int>(parse_int(value, key));
  else if (key == "methods") {
    config.methods.clear();
    for (const std::string& part : split(value, ',')) {
      const std::string item = trim(part);
      if (!item.empty()) config.methods.push_back(item);
    }
    if (config.methods.empty()) throw ConfigError("methods list is empty");
  }
  else if (key == "sigmas") config.sigmas = parse_double_list(value, key);
  else if (key == "votes") config.votes = parse_int_list(value, key);
  else if (key == "guidance_scale" || key == "guidance_scales") {
    config.guidance_scales = parse_double_list(value, key);
  }
  else if (key == "noising") config.noising = value;
  else if (key == "independent_votes") config.independent_votes = parse_bool(value, key);
  else if (key == "n0") config.n0 = static_cast<int>(parse_int(value, key));
  else if (key == "n") config.n = static_cast<int>(parse_int(value, key));
  else if (key == "alpha") config.alpha = parse_double(value, key);
  else if (key == "num_test_points") config.num_test_points = static_cast<int>(parse_int(value, key));
  else if (key == "seed") config.seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "radius_grid_fractions") config.radius_grid_fractions = parse_double_list(value, key);
  else if (key == "sweep_scales") config.sweep_scales = parse_double_list(value, key);
  else if (key == "sweep_steps") config.sweep_steps = parse_int_list(value, key);
  else if (key == "out") config.out_csv = value;
  else if (key == "out_summary") config.out_summary = value;
  else if (key == "workers") config.workers = static_cast<int>(parse_int(value, key));
  else throw ConfigError("unknown config key: " + key);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value' at line " +
                        std::to_string(line_no));
    }
    apply_config_entry(config, trim(line.substr(0, eq)),
                       trim(line.substr(eq + 1)));
  }
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path);
  }
  return parse_config(in);
}

TaskInstance build_task(const ExperimentConfig& config) {
  TaskInstance task;
  if (!config.dataset_file.empty()) {
    Dataset dataset = load_dataset_file(config.dataset_file);
    if (dataset.size() < config.num_test_points) {
      throw ConfigError("dataset holds fewer points than num_test_points");
    }
    task.gmm = std::move(dataset.generator);
    task.points.assign(dataset.points.begin(),
                       dataset.points.begin() + config.num_test_points);
    task.labels.assign(dataset.labels.begin(),
                       dataset.labels.begin() + config.num_test_points);
    return task;
  }
  if (!config.task_file.empty()) {
    task.gmm = load_gmm_file(config.task_file);
  } else {
    task.gmm = make_gmm_task(config.classes, config.dim, config.separation,
                             config.class_scale, config.task_seed);
  }
  Dataset dataset =
      sample_dataset(task.gmm, config.num_test_points,
                     substream_seed(config.seed, {kStreamPoints}));
  task.points = std::move(dataset.points);
  task.labels = std::move(dataset.labels);
  return task;
}

NoiseSchedule build_respaced_schedule(const ExperimentConfig& config) {
  NoiseSchedule base =
      build_linear_schedule(config.timesteps, config.beta_start,
                            config.beta_end);
  const std::vector<int> selection =
      evenly_spaced_timesteps(config.timesteps, config.respaced_steps);
  return respace(base, selection);
}

int resolve_workers(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("SMOOTHCERT_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back(body);
  }
  for (std::thread& t : pool) {
    t.join();
  }
  if (error) std::rethrow_exception(error);
}

namespace {

struct PipelineCell {
  PipelineConfig pipeline;
  std::string method_str;
};

std::vector<PipelineCell> expand_grid(const ExperimentConfig& config) {
  std::vector<PipelineCell> cells;
  for (const std::string& method_str : config.methods) {
    const Method method = parse_method(method_str);
    for (double sigma : config.sigmas) {
      for (int votes : config.votes) {
        PipelineCell cell;
        cell.method_str = method_str;
        cell.pipeline.method = method;
        cell.pipeline.sigma = sigma;
        cell.pipeline.votes = votes;
        cell.pipeline.respaced_steps = config.respaced_steps;
        cell.pipeline.noising = config.noising == "exact_match"
                                    ? NoisingConvention::kExactMatch
                                    : NoisingConvention::kSigmaDirect;
        cell.pipeline.independent_votes = config.independent_votes;
        cell.pipeline.guidance_scale =
            (method == Method::kAdds || method == Method::kAddsOneShot)
                ? config.guidance_scale_for(sigma)
                : 0.0;
        cell.pipeline.validate();
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

json build_summary(const ExperimentConfig& config,
                   const std::vector<PipelineCell>& cells,
                   const std::vector<CertifyRow>& rows) {
  json summary;
  summary["n0"] = config.n0;
  summary["n"] = config.n;
  summary["alpha"] = config.alpha;
  summary["num_test_points"] = config.num_test_points;
  summary["respaced_steps"] = config.respaced_steps;
  summary["radius_grid_fractions"] = config.radius_grid_fractions;
  json cell_array = json::array();
  const int points = config.num_test_points;
  const int P = static_cast<int>(cells.size());
  for (int p = 0; p < P; ++p) {
    const PipelineCell& cell = cells[p];
    int clean_hits = 0;
    int abstains = 0;
    json curve = json::array();
    for (double frac : config.radius_grid_fractions) {
      const double r = frac * cell.pipeline.sigma;
      int certified = 0;
      for (int i = 0; i < points; ++i) {
        const CertifyRow& row = rows[static_cast<std::size_t>(i) * P + p];
        if (row.correct && !row.abstained && row.radius >= r) {
          ++certified;
        }
      }
      curve.push_back({{"r", r},
                       {"certified_accuracy",
                        static_cast<double>(certified) / points}});
    }
    for (int i = 0; i < points; ++i) {
      const CertifyRow& row = rows[static_cast<std::size_t>(i) * P + p];
      clean_hits += row.correct ? 1 : 0;
      abstains += row.abstained ? 1 : 0;
    }
    json entry;
    entry["method"] = cell.method_str;
    entry["sigma"] = cell.pipeline.sigma;
    entry["votes"] = cell.pipeline.votes;
    entry["guidance_scale"] = cell.pipeline.guidance_scale;
    entry["clean_accuracy"] = static_cast<double>(clean_hits) / points;
    entry["abstain_rate"] = static_cast<double>(abstains) / points;
    entry["certified_accuracy"] = std::move(curve);
    cell_array.push_back(std::move(entry));
  }
  summary["cells"] = std::move(cell_array);
  return summary;
}

}  // namespace

CertifyTable run_certify(const ExperimentConfig& config) {
  config.validate();
  const TaskInstance task = build_task(config);
  const NoiseSchedule schedule = build_respaced_schedule(config);
  const GmmDenoiser denoiser(task.gmm, &schedule);
  const BayesClassifier classifier(task.gmm);
  const std::vector<PipelineCell> cells = expand_grid(config);

  const int points = config.num_test_points;
  const int P = static_cast<int>(cells.size());
  const int total = points * P;
  CertifyTable table;
  table.rows.resize(total);

  parallel_for(total, resolve_workers(config.workers), [&](int index) {
    const int point_idx = index / P;
    const int cell_idx = index % P;
    const PipelineCell& cell = cells[cell_idx];
    PipelineSampler sampler(cell.pipeline, denoiser, schedule);
    SampleStreams streams{substream_seed(
        config.seed, {kStreamCertify, static_cast<std::uint64_t>(point_idx),
                      static_cast<std::uint64_t>(cell_idx)})};
    const CertificationResult result =
        certify(task.points[point_idx], task.labels[point_idx], sampler,
                classifier, config.n0, config.n, config.alpha, streams);
    CertifyRow& row = table.rows[index];
    row.sample_id = point_idx;
    row.method = cell.method_str;
    row.sigma = cell.pipeline.sigma;
    row.votes = cell.pipeline.votes;
    row.guidance_scale = cell.pipeline.guidance_scale;
    row.prediction = result.prediction;
    row.true_label = task.labels[point_idx];
    row.correct = result.correct;
    row.abstained = result.abstained();
    row.p_lower = result.p_plus_lb;
    row.radius = result.radius;
    row.n0 = result.n0;
    row.n = result.n;
    row.alpha = result.alpha;
    row.wall_time_ms = result.wall_time_ms;
    row.seed = config.seed;
  });

  table.summary_json = build_summary(config, cells, table.rows).dump(2);
  return table;
}

void write_certify_csv(const std::vector<CertifyRow>& rows,
                       std::ostream& out) {
  out << "sample_id,method,sigma,votes,guidance_scale,prediction,true_label,"
         "correct,abstained,p_lower,radius,n0,n,alpha,wall_time_ms,seed\n";
  char time_buf[32];
  for (const CertifyRow& row : rows) {
    std::snprintf(time_buf, sizeof(time_buf), "%.3f", row.wall_time_ms);
    out << row.sample_id << ',' << row.method << ','
        << format_double(row.sigma) << ',' << row.votes << ','
        << format_double(row.guidance_scale) << ',';
    if (row.prediction == kAbstain) {
      out << "ABSTAIN";
    } else {
      out << row.prediction;
    }
    out << ',' << row.true_label << ',' << (row.correct ? 1 : 0) << ','
        << (row.abstained ? 1 : 0) << ',' << format_double(row.p_lower) << ','
        << format_double(row.radius) << ',' << row.n0 << ',' << row.n << ','
        << format_double(row.alpha) << ',' << time_buf << ',' << row.seed
        << "\n";
  }
}

std::vector<CertifyRow> read_certify_csv(std::istream& in) {
  std::vector<CertifyRow> rows;
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("empty certify CSV");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 16) {
      throw IoError("malformed CSV row at line " + std::to_string(line_no));
    }
    CertifyRow row;
    row.sample_id = static_cast<int>(parse_int(f[0], "sample_id"));
    row.method = f[1];
    row.sigma = parse_double(f[2], "sigma");
    row.votes = static_cast<int>(parse_int(f[3], "votes"));
    row.guidance_scale = parse_double(f[4], "guidance_scale");
    row.prediction = f[5] == "ABSTAIN"
                         ? kAbstain
                         : static_cast<int>(parse_int(f[5], "prediction"));
    row.true_label = static_cast<int>(parse_int(f[6], "true_label"));
    row.correct = parse_int(f[7], "correct") != 0;
    row.abstained = parse_int(f[8], "abstained") != 0;
    row.p_lower = parse_double(f[9], "p_lower");
    row.radius = parse_double(f[10], "radius");
    row.n0 = static_cast<int>(parse_int(f[11], "n0"));
    row.n = static_cast<int>(parse_int(f[12], "n"));
    row.alpha = parse_double(f[13], "alpha");
    row.wall_time_ms = parse_double(f[14], "wall_time_ms");
    row.seed = static_cast<std::uint64_t>(parse_int(f[15], "seed"));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CertifyRow> read_certify_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open: " + path);
  }
  return read_certify_csv(in);
}

namespace {

// Plain top-count estimate of the smoothed prediction; ties toward the
// smaller label, as in majority_vote.
int estimate_label(std::span<const double> x, PipelineSampler& sampler,
                   const Classifier& g, int n0, const SampleStreams& streams,
                   std::vector<int>& scratch) {
  scratch.clear();
  scratch.reserve(n0);
  for (int j = 0; j < n0; ++j) {
    Rng rng = streams.stream(0, static_cast<std::uint64_t>(j));
    scratch.push_back(sampler.sample_label(x, rng, g));
  }
  return majority_vote(scratch);
}

}  // namespace

AttackCheckReport run_attack_check(const ExperimentConfig& config,
                                   const std::vector<CertifyRow>& rows,
                                   int trials_per_point, double fraction) {
  config.validate();
  if (trials_per_point < 1) {
    throw ConfigError("trials_per_point must be >= 1");
  }
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("fraction must lie in (0, 1)");
  }
  const TaskInstance task = build_task(config);
  const NoiseSchedule schedule = build_respaced_schedule(config);
  const GmmDenoiser denoiser(task.gmm, &schedule);
  const BayesClassifier classifier(task.gmm);

  struct CheckItem {
    const CertifyRow* row;
    int row_index;
  };
  std::vector<CheckItem> items;
  std::atomic<int> skipped{0};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CertifyRow& row = rows[i];
    if (row.abstained || row.radius <= 0.0 || row.prediction == kAbstain) {
      continue;  // only certified rows are checked
    }
    if (row.sample_id < 0 || row.sample_id >= config.num_test_points) {
      ++skipped;
      continue;
    }
    bool known_method = true;
    try {
      parse_method(row.method);
    } catch (const std::invalid_argument&) {
      known_method = false;
    }
    if (!known_method) {
      ++skipped;
      continue;
    }
    items.push_back({&row, static_cast<int>(i)});
  }

  std::vector<long long> flips(items.size(), 0);
  parallel_for(static_cast<int>(items.size()),
               resolve_workers(config.workers), [&](int idx) {
    const CertifyRow& row = *items[idx].row;
    PipelineConfig pipeline;
    pipeline.method = parse_method(row.method);
    pipeline.sigma = row.sigma;
    pipeline.votes = row.votes;
    pipeline.guidance_scale = row.guidance_scale;
    pipeline.respaced_steps = config.respaced_steps;
    pipeline.noising = config.noising == "exact_match"
                           ? NoisingConvention::kExactMatch
                           : NoisingConvention::kSigmaDirect;
    pipeline.independent_votes = config.independent_votes;
    PipelineSampler sampler(pipeline, denoiser, schedule);

    const std::vector<double>& x = task.points[row.sample_id];
    const int d = static_cast<int>(x.size());
    std::vector<double> direction(d);
    std::vector<double> x_adv(d);
    std::vector<int> scratch;
    const std::uint64_t row_tag = static_cast<std::uint64_t>(items[idx].row_index);
    long long local_flips = 0;
    for (int trial = 0; trial < trials_per_point; ++trial) {
      Rng dir_rng = Rng::substream(
          config.seed,
          {kStreamAttack, row_tag, static_cast<std::uint64_t>(trial), 0xd1});
      dir_rng.fill_unit_direction(direction);
      const double norm = fraction * row.radius;
      for (int i = 0; i < d; ++i) {
        x_adv[i] = x[i] + norm * direction[i];
      }
      SampleStreams streams{substream_seed(
          config.seed,
          {kStreamAttack, row_tag, static_cast<std::uint64_t>(trial)})};
      const int label = estimate_label(x_adv, sampler, classifier, config.n0,
                                       streams, scratch);
      if (label != row.prediction) {
        ++local_flips;
      }
    }
    flips[idx] = local_flips;
  });

  AttackCheckReport report;
  report.skipped_rows = skipped.load();
  std::map<std::tuple<std::string, double, int>, AttackMethodStat> stats;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const CertifyRow& row = *items[i].row;
    auto key = std::make_tuple(row.method, row.sigma, row.votes);
    AttackMethodStat& stat = stats[key];
    stat.method = row.method;
    stat.sigma = row.sigma;
    stat.votes = row.votes;
    stat.points += 1;
    stat.trials += trials_per_point;
    stat.flips += flips[i];
  }
  json method_array = json::array();
  for (auto& [key, stat] : stats) {
    stat.flip_rate =
        stat.trials > 0 ? static_cast<double>(stat.flips) / stat.trials : 0.0;
    stat.flip_rate_stderr =
        stat.trials > 0
            ? std::sqrt(stat.flip_rate * (1.0 - stat.flip_rate) /
                        static_cast<double>(stat.trials))
            : 0.0;
    report.total_trials += stat.trials;
    report.total_flips += stat.flips;
    method_array.push_back({{"method", stat.method},
                            {"sigma", stat.sigma},
                            {"votes", stat.votes},
                            {"points", stat.points},
                            {"trials", stat.trials},
                            {"flips", stat.flips},
                            {"flip_rate", stat.flip_rate},
                            {"flip_rate_stderr", stat.flip_rate_stderr}});
    report.methods.push_back(stat);
  }
  report.overall_flip_rate =
      report.total_trials > 0
          ? static_cast<double>(report.total_flips) / report.total_trials
          : 0.0;
  json j;
  j["fraction"] = fraction;
  j["trials_per_point"] = trials_per_point;
  j["n0"] = config.n0;
  j["skipped_rows"] = report.skipped_rows;
  j["total_trials"] = report.total_trials;
  j["total_flips"] = report.total_flips;
  j["overall_flip_rate"] = report.overall_flip_rate;
  j["methods"] = std::move(method_array);
  report.json = j.dump(2);
  return report;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  std::vector<double> scales = config.sweep_scales;
  if (scales.empty()) scales = {config.guidance_scales[0]};
  std::vector<int> steps = config.sweep_steps;
  if (steps.empty()) steps = {config.respaced_steps};

  json cells = json::array();
  std::ostringstream csv;
  csv << "guidance_scale,respaced_steps,method,sigma,votes,r,"
         "certified_accuracy,clean_accuracy\n";
  for (double scale : scales) {
    for (int step_count : steps) {
      ExperimentConfig cell_config = config;
      cell_config.guidance_scales = {scale};
      cell_config.respaced_steps = step_count;
      cell_config.validate();
      const CertifyTable table = run_certify(cell_config);
      const json summary = json::parse(table.summary_json);
      for (const json& cell : summary.at("cells")) {
        const double clean = cell.at("clean_accuracy").get<double>();
        for (const json& pt : cell.at("certified_accuracy")) {
          csv << format_double(scale) << ',' << step_count << ','
              << cell.at("method").get<std::string>() << ','
              << format_double(cell.at("sigma").get<double>()) << ','
              << cell.at("votes").get<int>() << ','
              << format_double(pt.at("r").get<double>()) << ','
              << format_double(pt.at("certified_accuracy").get<double>())
              << ',' << format_double(clean) << "\n";
        }
      }
      cells.push_back({{"guidance_scale", scale},
                       {"respaced_steps", step_count},
                       {"summary", summary}});
    }
  }
  SweepResult result;
  result.json = cells.dump(2);
  result.csv = csv.str();
  return result;
}

}  // namespace smoothcert
