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

#include "fedspike/dp_mechanism.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fedspike/error.h"
#include "fedspike/spectral.h"

namespace fedspike {
namespace {

// Top-r projector of a symmetric matrix, with an eigengap check.
Eigen::MatrixXd CheckedProjector(const Eigen::MatrixXd& cov, int r) {
  EigenDecomposition eig = SymEig(cov);
  if (Eigengap(eig.values, r) < 1e-10) {
    throw NumericalError(
        "sample covariance eigengap below 1e-10 at rank " +
        std::to_string(r) + "; the top-r projector is not identifiable");
  }
  Eigen::MatrixXd u = eig.vectors.leftCols(r);
  return u * u.transpose();
}

}  // namespace

PrivacyBudget::PrivacyBudget(double epsilon, double delta)
    : epsilon_(epsilon), delta_(delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("epsilon must be positive and finite, got " +
                          std::to_string(epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1), got " +
                          std::to_string(delta));
  }
}

NoiseCalibration Calibrate(const PrivacyBudget& budget, int p, int r, int n,
                           double lambda, double sigma2) {
  if (p < 1 || r < 1 || r > p) {
    throw DimensionError("calibrate: need 1 <= r <= p");
  }
  if (n < 2) throw InvalidArgument("calibrate: need n >= 2 so that log n > 0");
  if (!(lambda > 0.0) || !(sigma2 > 0.0)) {
    throw InvalidArgument("calibrate: lambda and sigma2 must be positive");
  }
  const double eps = budget.epsilon();
  const double privacy = 8.0 / (eps * eps) * std::log(2.5 / budget.delta());
  const double nd = static_cast<double>(n);
  const double log_term = r + std::log(nd);
  const double ratio = sigma2 / lambda;

  NoiseCalibration out;
  out.alpha_sq = privacy * ratio * (ratio + 1.0) * p * log_term / (nd * nd);
  out.beta_sq = privacy *
                (lambda * lambda * log_term * log_term +
                 sigma2 * sigma2 * static_cast<double>(p) * p) /
                (nd * nd);
  if (!std::isfinite(out.alpha_sq) || !std::isfinite(out.beta_sq) ||
      !(out.alpha_sq > 0.0) || !(out.beta_sq > 0.0)) {
    throw NumericalError("calibrate: noise variances are not finite/positive");
  }
  return out;
}

Eigen::MatrixXd SampleSymmetricNoise(int p, double variance, Seed seed) {
  if (p < 1) throw DimensionError("noise dimension must be >= 1");
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw InvalidArgument("noise variance must be finite and non-negative");
  }
  Engine engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(variance);
  const double sd_diag = std::sqrt(2.0 * variance);
  Eigen::MatrixXd z(p, p);
  for (int col = 0; col < p; ++col) {
    z(col, col) = sd_diag * normal(engine);
    for (int row = col + 1; row < p; ++row) {
      const double v = sd * normal(engine);
      z(row, col) = v;
      z(col, row) = v;
    }
  }
  return z;
}

double ProjectorSensitivityBound(int p, int r, int n, double lambda,
                                 double sigma2, double constant) {
  const double nd = static_cast<double>(n);
  return constant / nd *
         std::sqrt((lambda + sigma2) / lambda * sigma2 / lambda) *
         std::sqrt(p * (r + std::log(nd)));
}

double ProjectorReplacementChange(const Dataset& data, int index,
                                  const Eigen::VectorXd& replacement, int r) {
  if (index < 0 || index >= data.size()) {
    throw DimensionError("replacement index out of range");
  }
  if (replacement.size() != data.dim()) {
    throw DimensionError("replacement datum has wrong dimension");
  }
  Eigen::MatrixXd cov = SampleCovariance(data);
  Eigen::MatrixXd original = CheckedProjector(cov, r);
  const Eigen::VectorXd old = data.samples().col(index);
  Eigen::MatrixXd neighbor =
      cov + (replacement * replacement.transpose() - old * old.transpose()) /
                static_cast<double>(data.size());
  return (original - CheckedProjector(neighbor, r)).norm();
}

SensitivityReport EmpiricalProjectorSensitivity(const SpikedModel& model,
                                                int n, int r, int trials,
                                                Seed seed, double constant) {
  if (n < r + 2) {
    throw InvalidArgument("sensitivity oracle needs n >= r + 2");
  }
  if (trials < 1) throw InvalidArgument("sensitivity oracle needs trials >= 1");
  if (r < 1 || r > model.dim()) throw DimensionError("rank out of range");

  SensitivityReport report;
  report.constant = constant;
  report.analytic_bound = ProjectorSensitivityBound(
      model.dim(), r, n, model.plugin_lambda(), model.noise_var(), constant);
  report.per_trial.reserve(trials);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (int t = 0; t < trials; ++t) {
    Dataset data = Sample(model, n, DeriveSeed(seed, "sensitivity-data", t));
    Dataset fresh = Sample(model, n, DeriveSeed(seed, "sensitivity-fresh", t));
    Eigen::MatrixXd cov = SampleCovariance(data);
    Eigen::MatrixXd base = CheckedProjector(cov, r);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto old = data.samples().col(i);
      const auto neu = fresh.samples().col(i);
      Eigen::MatrixXd neighbor = cov;
      neighbor.noalias() += inv_n * (neu * neu.transpose());
      neighbor.noalias() -= inv_n * (old * old.transpose());
      worst = std::max(worst, (base - CheckedProjector(neighbor, r)).norm());
    }
    report.per_trial.push_back(worst);
    report.empirical_max = std::max(report.empirical_max, worst);
  }
  report.sensitivity_margin = report.empirical_max > 0.0
                                  ? report.analytic_bound / report.empirical_max
                                  : std::numeric_limits<double>::infinity();
  return report;
}

}  // namespace fedspike
