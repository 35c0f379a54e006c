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

#include "fedspike/spectral.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "../oracles/jacobi_eigen.h"
#include "fedspike/error.h"
#include "fedspike/random.h"
#include "fedspike/spiked_model.h"

namespace fedspike {
namespace {

Eigen::MatrixXd RandomSymmetric(int p, Seed seed) {
  Engine engine(seed);
  Eigen::MatrixXd g = StandardNormalMatrix(p, p, engine);
  return 0.5 * (g + g.transpose());
}

Eigen::MatrixXd Projector(const Eigen::MatrixXd& u) { return u * u.transpose(); }

TEST(SymEigTest, DiagonalInput) {
  const Eigen::Vector3d d(3, 1, 2);
  const EigenDecomposition e = SymEig(Eigen::MatrixXd(d.asDiagonal()));
  EXPECT_EQ(e.values, Eigen::Vector3d(3, 2, 1));
  Eigen::Matrix3d want;
  want << 1, 0, 0,
          0, 0, 1,
          0, 1, 0;
  EXPECT_LE((e.vectors - want).norm(), 1e-15);
}

TEST(SymEigTest, TwoByTwoSwap) {
  Eigen::Matrix2d m;
  m << 0, 1, 1, 0;
  const EigenDecomposition e = SymEig(m);
  EXPECT_NEAR(e.values(0), 1.0, 1e-15);
  EXPECT_NEAR(e.values(1), -1.0, 1e-15);
  const double h = 1.0 / std::sqrt(2.0);
  // Sign convention: largest-magnitude entry positive, ties to lowest index.
  EXPECT_NEAR(e.vectors(0, 0), h, 1e-15);
  EXPECT_NEAR(e.vectors(1, 0), h, 1e-15);
  EXPECT_NEAR(e.vectors(0, 1), h, 1e-15);
  EXPECT_NEAR(e.vectors(1, 1), -h, 1e-15);
}

TEST(SymEigTest, RecoversConstructedSpectrum) {
  const Eigen::MatrixXd q = RandomOrthonormal(7, 7, 5);
  Eigen::VectorXd d(7);
  d << 9.5, 4.0, 2.25, 1.0, -0.5, -3.0, -8.0;
  const Eigen::MatrixXd m = q * d.asDiagonal() * q.transpose();
  const EigenDecomposition e = SymEig(0.5 * (m + m.transpose()));
  for (int k = 0; k < 7; ++k) EXPECT_NEAR(e.values(k), d(k), 1e-9);
  const Eigen::MatrixXd recon =
      e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  EXPECT_LE((recon - m).norm(), 1e-9);
}

TEST(SymEigTest, RejectsAsymmetricAndNonFinite) {
  Eigen::Matrix2d m;
  m << 1, 2, 0, 1;
  EXPECT_THROW(SymEig(m), InvalidArgument);
  m << 1, std::numeric_limits<double>::infinity(), 0, 1;
  EXPECT_THROW(SymEig(m), InvalidArgument);
  EXPECT_THROW(SymEig(Eigen::MatrixXd(2, 3)), DimensionError);
}

TEST(SymEigTest, AgreesWithJacobiOracle) {
  for (Seed seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd m = RandomSymmetric(6, seed);
    const EigenDecomposition e = SymEig(m);
    const oracle::JacobiResult o = oracle::JacobiEigen(m);
    EXPECT_LE((e.values - o.values).cwiseAbs().maxCoeff(), 1e-10) << seed;
  }
}

TEST(TopSubspaceTest, DiagonalSpan) {
  const Eigen::Vector3d d(5, 4, 1);
  const Eigen::MatrixXd v = TopSubspace(Eigen::MatrixXd(d.asDiagonal()), 2);
  EXPECT_NEAR(ProjectionDistance(v, Eigen::MatrixXd::Identity(3, 2)), 0.0, 1e-12);
}

TEST(TopSubspaceTest, ExactProjectorRecovered) {
  const Eigen::MatrixXd u = RandomOrthonormal(6, 2, 8);
  EXPECT_LE(ProjectionDistance(TopSubspace(Projector(u), 2), u), 1e-8);
}

TEST(TopSubspaceTest, MatchesOracleTruncation) {
  for (Seed seed = 100; seed < 120; ++seed) {
    const Eigen::MatrixXd m = RandomSymmetric(6, seed);
    const Eigen::MatrixXd v = TopSubspace(m, 3);
    EXPECT_LE((Projector(v) - oracle::TopProjector(m, 3)).norm(), 1e-10) << seed;
  }
}

TEST(TopSubspaceTest, InvariantUnderDiagonalShift) {
  const Eigen::MatrixXd m = RandomSymmetric(8, 3);
  const Eigen::MatrixXd shifted = m + 7.5 * Eigen::MatrixXd::Identity(8, 8);
  EXPECT_LE(ProjectionDistance(TopSubspace(m, 2), TopSubspace(shifted, 2)), 1e-9);
}

TEST(TopSubspaceTest, RankOutOfRange) {
  EXPECT_THROW(TopSubspace(Eigen::MatrixXd::Identity(3, 3), 4), DimensionError);
  EXPECT_THROW(TopSubspace(Eigen::MatrixXd::Identity(3, 3), 0), DimensionError);
}

TEST(EigengapTest, Basic) {
  const Eigen::Vector3d v(5, 4, 1);
  EXPECT_DOUBLE_EQ(Eigengap(v, 1), 1.0);
  EXPECT_DOUBLE_EQ(Eigengap(v, 2), 3.0);
  EXPECT_TRUE(std::isinf(Eigengap(v, 3)));
}

TEST(SampleCovarianceTest, SingleSample) {
  Eigen::MatrixXd x(2, 1);
  x << 2, 0;
  Eigen::Matrix2d want;
  want << 4, 0, 0, 0;
  EXPECT_EQ(SampleCovariance(Dataset(x)), Eigen::MatrixXd(want));
}

TEST(SampleCovarianceTest, TwoBasisVectors) {
  EXPECT_EQ(SampleCovariance(Dataset(Eigen::MatrixXd::Identity(2, 2))),
            Eigen::MatrixXd(0.5 * Eigen::MatrixXd::Identity(2, 2)));
}

TEST(SampleCovarianceTest, ConcentratesAtSqrtPOverN) {
  const SpikedModel model = SpikedModel::WithRandomBasis(20, 2, 10.0, 1.0, 4);
  const int n = 20000;
  const Eigen::MatrixXd s = SampleCovariance(Sample(model, n, 6));
  const Eigen::MatrixXd sigma = CovarianceMatrix(model);
  const double op_err = (s - sigma).operatorNorm();
  EXPECT_LE(op_err / sigma.operatorNorm(), 3.0 * std::sqrt(20.0 / n));
}

TEST(ExplainedVarianceTest, FullBasisIsOne) {
  const SpikedModel model = SpikedModel::WithRandomBasis(4, 1, 3.0, 1.0, 4);
  const Dataset data = Sample(model, 50, 1);
  EXPECT_NEAR(ExplainedVariance(Eigen::MatrixXd::Identity(4, 4), data), 1.0,
              1e-12);
}

TEST(ExplainedVarianceTest, DataInsideSpan) {
  const Eigen::MatrixXd u = RandomOrthonormal(5, 2, 3);
  Engine engine(1);
  const Dataset data(u * StandardNormalMatrix(2, 40, engine));
  EXPECT_NEAR(ExplainedVariance(u, data), 1.0, 1e-12);
}

TEST(ExplainedVarianceTest, DiagonalModel) {
  Eigen::VectorXd spikes(1);
  spikes << 3.0;
  const SpikedModel model(Eigen::MatrixXd::Identity(2, 1), spikes, 1.0);
  const Dataset data = Sample(model, 100000, 12);
  EXPECT_NEAR(ExplainedVariance(Eigen::MatrixXd::Identity(2, 1), data), 0.8,
              0.02);
}

TEST(ExplainedVarianceTest, ZeroVarianceRejected) {
  const Dataset data(Eigen::MatrixXd::Ones(3, 4));
  EXPECT_THROW(ExplainedVariance(Eigen::MatrixXd::Identity(3, 1), data),
               InvalidArgument);
}

}  // namespace
}  // namespace fedspike
