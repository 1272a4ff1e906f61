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

#ifndef SMOOTHCERT_SAMPLER_H_
#define SMOOTHCERT_SAMPLER_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smoothcert/classifier.h"
#include "smoothcert/denoiser.h"
#include "smoothcert/privacy.h"
#include "smoothcert/rng.h"
#include "smoothcert/schedule.h"

namespace smoothcert {

enum class Method { kRs, kDds, kDensePure, kAdds, kAddsOneShot };
enum class NoisingConvention { kSigmaDirect, kExactMatch };

Method parse_method(const std::string& name);
const char* method_name(Method method);

struct PipelineConfig {
  Method method = Method::kRs;
  double sigma = 1.0;           // total RS noise std
  double guidance_scale = 0.0;  // adds variants only
  int votes = 1;                // densepure / adds only
  int respaced_steps = 20;      // consumed when building the schedule
  NoisingConvention noising = NoisingConvention::kSigmaDirect;
  // When set, adds votes rerun the guided prefix per vote (each on its own
  // budget) instead of sharing it; comparison mode only.
  bool independent_votes = false;

  void validate() const;
};

struct TrajectoryPoint {
  int t;
  std::vector<double> x;
};

// Debug / audit record of one pipeline run. States run from x_T down to the
// final output; for multi-vote runs only the shared prefix is recorded.
struct Trajectory {
  std::vector<TrajectoryPoint> states;
  std::vector<SpendRecord> ledger;
  int t_exhausted = 0;  // 0 when the budget never ran out

  bool exhausted() const { return t_exhausted > 0; }

  // Plain-text dump: one line per state (t, min pixel, max pixel) and per
  // ledger entry (t, scale, min/max cost, min remaining budget).
  void write_debug(std::ostream& out) const;
};

// Reverse-diffusion step in the x0-parameterization:
//   x_{t-1} = coef_x0 * x0_hat + coef_xt * x_t + sigma_diag .* z.
void ddpm_step_mean(std::span<const double> x_t,
                    std::span<const double> x0_hat, int t,
                    const NoiseSchedule& schedule, std::span<double> out);
void ddpm_step(std::span<const double> x_t, std::span<const double> x0_hat,
               int t, const NoiseSchedule& schedule,
               std::span<const double> sigma_diag, Rng& rng,
               std::span<double> out);

// Same step in the epsilon-parameterization,
//   x_{t-1} = (x_t - (1 - alpha_t)/sqrt(1 - alpha_bar_t) eps) / sqrt(alpha_t)
//             + sigma_diag .* z,
// kept as an independent route for the algebraic-identity checks.
void ddpm_step_eps_form(std::span<const double> x_t,
                        std::span<const double> eps_hat, int t,
                        const NoiseSchedule& schedule,
                        std::span<const double> sigma_diag, Rng& rng,
                        std::span<double> out);

// x0_hat <- (1 - s) x0_hat + s x. The only place the clean input enters a
// guided run; s == 0 returns without reading x.
void apply_guidance(std::span<double> x0_hat, std::span<const double> x,
                    double s);

// One-shot final image: the denoiser's clean-image prediction at (x_t, t).
std::vector<double> one_shot_x0(std::span<const double> x_t, int t,
                                const Denoiser& denoiser,
                                const NoiseSchedule& schedule);

// Runs one smoothing draw of the configured pipeline. A sampler owns its
// scratch buffers, so each concurrent run needs its own instance; given the
// same rng stream the outputs are deterministic.
class PipelineSampler {
 public:
  PipelineSampler(const PipelineConfig& config, const Denoiser& denoiser,
                  const NoiseSchedule& schedule);

  const PipelineConfig& config() const { return config_; }
  int dim() const { return dim_; }

  // Vote-branch outputs of one smoothing draw (size 1 for rs/dds/oneshot,
  // `votes` for densepure/adds).
  void sample(std::span<const double> x, Rng& rng,
              std::vector<std::vector<double>>& out,
              Trajectory* trajectory = nullptr);

  // One smoothing draw reduced to a label: classify every branch, then
  // majority-vote. Allocation-free after warmup.
  int sample_label(std::span<const double> x, Rng& rng, const Classifier& g);

  // Clean-image guided denoising (adds / adds_oneshot only): pure-noise start,
  // per-step filter-gated guidance with the largest-feasible-scale fallback at
  // exhaustion, then unguided continuation (adds) or an immediate one-shot
  // final image (adds_oneshot).
  void guided_denoise(std::span<const double> x, Rng& rng,
                      std::vector<double>& x0_out,
                      Trajectory* trajectory = nullptr);

 private:
  struct PrefixResult {
    int next_t = 0;         // level of the state left in x_t_
    bool early_image = false;  // oneshot produced the final image in x0_hat_
  };

  PrefixResult run_guided_prefix(std::span<const double> x, Rng& rng,
                                 Trajectory* trajectory);
  void complete_unguided(int from_t, Rng& rng, std::vector<double>& state,
                         Trajectory* trajectory);
  void run_pipeline(std::span<const double> x, Rng& rng,
                    Trajectory* trajectory);
  void record_state(Trajectory* trajectory, int t,
                    std::span<const double> x) const;
  void record_spend(Trajectory* trajectory, int t, double scale) const;

  PipelineConfig config_;
  const Denoiser* denoiser_;
  const NoiseSchedule* schedule_;
  int dim_;
  int t_star_ = 0;         // dds / densepure embedding step
  double sigma_prime_ = 0.0;  // input noising std under the convention
  double sqrt_ab_star_ = 0.0;

  BudgetVector budget_;
  std::vector<double> x_t_, x_next_, x0_hat_, sigma_diag_, cost_;
  std::vector<std::vector<double>> outputs_;
  std::vector<int> branch_labels_;
};

}  // namespace smoothcert

#endif  // SMOOTHCERT_SAMPLER_H_
