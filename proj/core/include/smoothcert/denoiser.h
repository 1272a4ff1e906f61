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

#ifndef SMOOTHCERT_DENOISER_H_
#define SMOOTHCERT_DENOISER_H_

#include <span>
#include <vector>

#include "smoothcert/gmm.h"
#include "smoothcert/schedule.h"

namespace smoothcert {

// One reverse step's prediction: the clean-image estimate and the per-pixel
// noise std devs for the re-noising draw.
struct DenoiserOutput {
  std::vector<double> x0_hat;
  std::vector<double> sigma_diag;
};

// Clean-image predictor for the reverse process. Implementations are
// immutable after construction and deterministic in (x_t, t), so predict is
// pure and reentrant.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual int dim() const = 0;

  // Writes the prediction and per-pixel noise stds into caller buffers of
  // size dim(). The default covariance is the schedule's posterior variance
  // in every pixel; implementations may override with any diagonal.
  virtual void predict_into(std::span<const double> x_t, int t,
                            const NoiseSchedule& schedule,
                            std::span<double> x0_hat,
                            std::span<double> sigma_diag) const = 0;

  // Allocating convenience wrapper with dimension checks.
  DenoiserOutput predict(std::span<const double> x_t, int t,
                         const NoiseSchedule& schedule) const;
};

// Predicts x0 = 0 regardless of input; useful as a degenerate baseline.
class ZeroDenoiser : public Denoiser {
 public:
  explicit ZeroDenoiser(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  void predict_into(std::span<const double> x_t, int t,
                    const NoiseSchedule& schedule, std::span<double> x0_hat,
                    std::span<double> sigma_diag) const override;

 private:
  int dim_;
};

// Exact posterior-mean denoiser for a Gaussian-mixture data distribution.
// Binding a schedule at construction precomputes the per-timestep component
// constants; predictions against any other schedule fall back to the generic
// path and stay correct.
class GmmDenoiser : public Denoiser {
 public:
  GmmDenoiser(GmmModel gmm, const NoiseSchedule* bound_schedule = nullptr);

  int dim() const override { return gmm_.dim(); }
  const GmmModel& model() const { return gmm_; }

  void predict_into(std::span<const double> x_t, int t,
                    const NoiseSchedule& schedule, std::span<double> x0_hat,
                    std::span<double> sigma_diag) const override;

 private:
  struct StepTable {
    double sqrt_ab;
    std::vector<double> scaled_means;  // K*d: sqrt_ab * mu_k
    std::vector<double> log_norm;      // K: log w_k - d/2 log(2 pi v_k)
    std::vector<double> inv_two_v;     // K: 1 / (2 v_k)
    std::vector<double> shrink;        // K: sqrt_ab c_k^2 / v_k
  };

  void predict_fast(const StepTable& table, std::span<const double> x_t,
                    std::span<double> out) const;

  GmmModel gmm_;
  const NoiseSchedule* bound_schedule_ = nullptr;
  std::vector<StepTable> tables_;  // indexed by t - 1 when bound
};

// epsilon-prediction <-> x0-prediction conversions from the forward identity
// x_t = sqrt(ab) x0 + sqrt(1 - ab) eps.
void x0_from_eps(std::span<const double> x_t, std::span<const double> eps,
                 double alpha_bar, std::span<double> x0_out);
void eps_from_x0(std::span<const double> x_t, std::span<const double> x0,
                 double alpha_bar, std::span<double> eps_out);

}  // namespace smoothcert

#endif  // SMOOTHCERT_DENOISER_H_
