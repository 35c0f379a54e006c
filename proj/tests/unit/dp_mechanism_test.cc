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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fedspike/error.h"
#include "fedspike/spiked_model.h"

namespace fedspike {
namespace {

// Reference values from a 40-digit evaluation of the closed forms.
constexpr double kAlphaSqEps1 = 1.4460959826293167824e-05;
constexpr double kBetaSqEps1 = 3.3283446546450368416e-03;

TEST(PrivacyBudgetTest, Validation) {
  EXPECT_NO_THROW(PrivacyBudget(0.5, 0.1));
  EXPECT_THROW(PrivacyBudget(0.0, 0.1), InvalidArgument);
  EXPECT_THROW(PrivacyBudget(-1.0, 0.1), InvalidArgument);
  EXPECT_THROW(PrivacyBudget(std::numeric_limits<double>::infinity(), 0.1),
               InvalidArgument);
  EXPECT_THROW(PrivacyBudget(1.0, 0.0), InvalidArgument);
  EXPECT_THROW(PrivacyBudget(1.0, 1.0), InvalidArgument);
}

TEST(CalibrateTest, PinnedReferenceConfig) {
  const NoiseCalibration c = Calibrate(PrivacyBudget(1.0, 0.1), 50, 1, 10000,
                                       10.0, 1.0);
  EXPECT_NEAR(c.alpha_sq, kAlphaSqEps1, 1e-14 * kAlphaSqEps1);
  EXPECT_NEAR(c.beta_sq, kBetaSqEps1, 1e-14 * kBetaSqEps1);
}

TEST(CalibrateTest, EpsilonSquaredScaling) {
  const NoiseCalibration a = Calibrate(PrivacyBudget(0.3, 0.1), 30, 2, 800, 4.0, 1.5);
  const NoiseCalibration b = Calibrate(PrivacyBudget(0.6, 0.1), 30, 2, 800, 4.0, 1.5);
  EXPECT_DOUBLE_EQ(a.alpha_sq / b.alpha_sq, 4.0);
  EXPECT_DOUBLE_EQ(a.beta_sq / b.beta_sq, 4.0);
}

TEST(CalibrateTest, SampleSizeSquaredScalingAtFixedLogTerm) {
  // Doubling n also moves log n; divide that factor out.
  const int n = 1000;
  const NoiseCalibration a = Calibrate(PrivacyBudget(1.0, 0.1), 10, 1, n, 2.0, 1.0);
  const NoiseCalibration b = Calibrate(PrivacyBudget(1.0, 0.1), 10, 1, 2 * n, 2.0, 1.0);
  const double log_ratio = (1.0 + std::log(2.0 * n)) / (1.0 + std::log(n));
  EXPECT_NEAR(a.alpha_sq / b.alpha_sq, 4.0 / log_ratio, 1e-12);
}

TEST(CalibrateTest, RejectsBadInputs) {
  const PrivacyBudget b(1.0, 0.1);
  EXPECT_THROW(Calibrate(b, 5, 1, 1, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(Calibrate(b, 5, 1, 10, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(Calibrate(b, 5, 6, 10, 1.0, 1.0), DimensionError);
}

TEST(SymmetricNoiseTest, SymmetricAndDeterministic) {
  const Eigen::MatrixXd z = SampleSymmetricNoise(5, 2.0, 3);
  EXPECT_EQ(z, z.transpose());
  EXPECT_EQ(z, SampleSymmetricNoise(5, 2.0, 3));
  EXPECT_NE(z, SampleSymmetricNoise(5, 2.0, 4));
  EXPECT_EQ(SampleSymmetricNoise(3, 0.0, 1), Eigen::MatrixXd::Zero(3, 3));
}

TEST(SymmetricNoiseTest, EntryVariances) {
  const double var = 0.25;
  const int draws = 20000;
  double diag = 0.0, off = 0.0;
  for (int t = 0; t < draws; ++t) {
    const Eigen::MatrixXd z = SampleSymmetricNoise(3, var, 1000 + t);
    diag += z(1, 1) * z(1, 1);
    off += z(2, 0) * z(2, 0);
  }
  EXPECT_NEAR(diag / draws, 2.0 * var, 0.05 * 2.0 * var);
  EXPECT_NEAR(off / draws, var, 0.05 * var);
}

TEST(SensitivityBoundTest, ClosedForm) {
  const double b = ProjectorSensitivityBound(20, 1, 500, 10.0, 1.0, 4.0);
  const double want =
      4.0 / 500.0 * std::sqrt(11.0 / 10.0 * 0.1) * std::sqrt(20.0 * (1.0 + std::log(500.0)));
  EXPECT_NEAR(b, want, 1e-15);
}

TEST(ReplacementChangeTest, SelfReplacementIsZero) {
  const SpikedModel model = SpikedModel::WithRandomBasis(6, 1, 10.0, 1.0, 1);
  const Dataset data = Sample(model, 40, 2);
  EXPECT_NEAR(ProjectorReplacementChange(data, 3, data.samples().col(3), 1),
              0.0, 1e-12);
}

TEST(ReplacementChangeTest, IndexChecked) {
  const SpikedModel model = SpikedModel::WithRandomBasis(6, 1, 10.0, 1.0, 1);
  const Dataset data = Sample(model, 10, 2);
  EXPECT_THROW(ProjectorReplacementChange(data, 10, data.samples().col(0), 1),
               DimensionError);
}

TEST(EmpiricalSensitivityTest, BelowBoundAndScalesLikeOneOverN) {
  const SpikedModel model = SpikedModel::WithRandomBasis(20, 1, 10.0, 1.0, 17);
  const SensitivityReport small = EmpiricalProjectorSensitivity(model, 500, 1, 20, 5);
  const SensitivityReport large = EmpiricalProjectorSensitivity(model, 1000, 1, 20, 6);
  for (double v : small.per_trial) EXPECT_LT(v, small.analytic_bound);
  EXPECT_GT(small.sensitivity_margin, 1.0);
  double mean_small = 0.0, mean_large = 0.0;
  for (double v : small.per_trial) mean_small += v / 20.0;
  for (double v : large.per_trial) mean_large += v / 20.0;
  const double ratio = mean_large / mean_small;
  EXPECT_GE(ratio, 0.35);
  EXPECT_LE(ratio, 0.7);
}

}  // namespace
}  // namespace fedspike
