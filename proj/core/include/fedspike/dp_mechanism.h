/*
 * Copyright 2026 The fedspike Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSPIKE_DP_MECHANISM_H_
#define FEDSPIKE_DP_MECHANISM_H_

#include <vector>

#include <Eigen/Dense>

#include "fedspike/random.h"
#include "fedspike/spiked_model.h"

namespace fedspike {

// (epsilon, delta) with epsilon > 0 and 0 < delta < 1.
class PrivacyBudget {
 public:
  PrivacyBudget(double epsilon, double delta);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }

  friend bool operator==(const PrivacyBudget&, const PrivacyBudget&) = default;

 private:
  double epsilon_;
  double delta_;
};

// Gaussian-mechanism variances for one client.
struct NoiseCalibration {
  double alpha_sq;  // off-diagonal variance of the projector noise Z_j
  double beta_sq;   // off-diagonal variance of the eigenvalue noise E_j
};

// alpha^2 = (8/eps^2) log(2.5/delta) (s/lambda)(s/lambda + 1) p (r + log n) / n^2
// beta^2  = (8/eps^2) log(2.5/delta) (lambda^2 (r + log n)^2 + s^2 p^2) / n^2
// with s = sigma2 and natural logarithms. Requires n >= 2.
NoiseCalibration Calibrate(const PrivacyBudget& budget, int p, int r, int n,
                           double lambda, double sigma2);

// Symmetric p x p Gaussian matrix: strict lower triangle i.i.d.
// N(0, variance) mirrored to the upper triangle, diagonal i.i.d.
// N(0, 2 variance).
Eigen::MatrixXd SampleSymmetricNoise(int p, double variance, Seed seed);

// C (1/n) sqrt((lambda + s)/lambda * s/lambda) sqrt(p (r + log n)).
double ProjectorSensitivityBound(int p, int r, int n, double lambda,
                                 double sigma2, double constant);

// ||P(X) - P(X')||_F where P is the top-r spectral projector of the sample
// covariance and X' equals X with column i replaced by `replacement`.
double ProjectorReplacementChange(const Dataset& data, int index,
                                  const Eigen::VectorXd& replacement, int r);

struct SensitivityReport {
  std::vector<double> per_trial;  // max over i within each trial
  double empirical_max = 0.0;     // max over trials
  double analytic_bound = 0.0;    // ProjectorSensitivityBound at `constant`
  double constant = 0.0;
  // analytic_bound / empirical_max; > 1 means the envelope held.
  double sensitivity_margin = 0.0;
};

// Leave-one-out sensitivity of the top-r sample projector. Each trial draws
// a fresh dataset of size n from `model`, replaces every datum in turn by an
// independent draw and records the largest projector change. Throws
// NumericalError when the sample covariance has an eigengap below 1e-10.
SensitivityReport EmpiricalProjectorSensitivity(const SpikedModel& model,
                                                int n, int r, int trials,
                                                Seed seed,
                                                double constant = 4.0);

}  // namespace fedspike

#endif  // FEDSPIKE_DP_MECHANISM_H_
