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

#include "fedspike/spiked_model.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "fedspike/error.h"
#include "fedspike/spectral.h"

namespace fedspike {
namespace {

Eigen::MatrixXd Canonical(int p, std::initializer_list<int> cols) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(p, static_cast<int>(cols.size()));
  int k = 0;
  for (int c : cols) u(c, k++) = 1.0;
  return u;
}

TEST(RandomOrthonormalTest, SquareIsOrthogonal) {
  const Eigen::MatrixXd q = RandomOrthonormal(3, 3, 11);
  EXPECT_LE((q.transpose() * q - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-10);
}

TEST(RandomOrthonormalTest, Deterministic) {
  EXPECT_EQ(RandomOrthonormal(5, 1, 7), RandomOrthonormal(5, 1, 7));
}

TEST(RandomOrthonormalTest, ColumnsOrthogonal) {
  const Eigen::MatrixXd u = RandomOrthonormal(4, 2, 1);
  EXPECT_LE(std::abs(u.col(0).dot(u.col(1))), 1e-12);
}

TEST(RandomOrthonormalTest, RankAboveDimensionRejected) {
  EXPECT_THROW(RandomOrthonormal(3, 4, 1), DimensionError);
}

TEST(SpikedModelTest, RejectsBadParameters) {
  Eigen::VectorXd spikes(1);
  spikes << 3.0;
  EXPECT_THROW(SpikedModel(Canonical(2, {0}), spikes, -1.0), InvalidArgument);
  Eigen::VectorXd bad(2);
  bad << 1.0, 2.0;  // increasing
  EXPECT_THROW(SpikedModel(Canonical(3, {0, 1}), bad, 1.0), InvalidArgument);
  Eigen::MatrixXd skew(2, 1);
  skew << 1.0, 1.0;
  EXPECT_THROW(SpikedModel(skew, spikes, 1.0), InvalidArgument);
}

TEST(CovarianceMatrixTest, SingleSpike) {
  Eigen::VectorXd spikes(1);
  spikes << 3.0;
  const SpikedModel model(Canonical(2, {0}), spikes, 1.0);
  Eigen::Matrix2d want;
  want << 4.0, 0.0, 0.0, 1.0;
  EXPECT_LE((CovarianceMatrix(model) - want).norm(), 1e-15);
}

TEST(CovarianceMatrixTest, TwoSpikes) {
  Eigen::VectorXd spikes(2);
  spikes << 2.0, 1.0;
  const SpikedModel model(Canonical(3, {0, 1}), spikes, 0.5);
  const Eigen::Vector3d diag(2.5, 1.5, 0.5);
  EXPECT_LE((CovarianceMatrix(model) - Eigen::MatrixXd(diag.asDiagonal())).norm(),
            1e-15);
}

TEST(CovarianceMatrixTest, SpikePartHasRankR) {
  const SpikedModel model = SpikedModel::WithRandomBasis(8, 3, 5.0, 0.7, 3);
  const Eigen::MatrixXd spike =
      CovarianceMatrix(model) - 0.7 * Eigen::MatrixXd::Identity(8, 8);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(spike);
  svd.setThreshold(1e-10);
  EXPECT_EQ(svd.rank(), 3);
}

TEST(SampleTest, EmpiricalCovarianceMatchesModel) {
  Eigen::VectorXd spikes(1);
  spikes << 3.0;
  const SpikedModel model(Canonical(2, {0}), spikes, 1.0);
  const Dataset data = Sample(model, 200000, 5);
  const Eigen::MatrixXd s = SampleCovariance(data);
  EXPECT_NEAR(s(0, 0), 4.0, 0.05 * 4.0);
  EXPECT_NEAR(s(1, 1), 1.0, 0.05);
  // Off-diagonal target is 0; sd of the estimator is sqrt(4/n).
  EXPECT_LE(std::abs(s(0, 1)), 3.0 * std::sqrt(4.0 / 200000));
}

TEST(SampleTest, CoordinateMeansNearZero) {
  const SpikedModel model = SpikedModel::WithRandomBasis(6, 2, 10.0, 1.0, 9);
  const Dataset data = Sample(model, 5000, 10);
  const Eigen::MatrixXd sigma = CovarianceMatrix(model);
  const Eigen::VectorXd mean = data.samples().rowwise().mean();
  for (int k = 0; k < 6; ++k) {
    EXPECT_LE(std::abs(mean(k)), 4.0 * std::sqrt(sigma(k, k) / 5000));
  }
}

TEST(SampleTest, SameSeedBitIdentical) {
  const SpikedModel model = SpikedModel::WithRandomBasis(5, 1, 10.0, 1.0, 2);
  EXPECT_EQ(Sample(model, 50, 77).samples(), Sample(model, 50, 77).samples());
  EXPECT_NE(Sample(model, 50, 77).samples(), Sample(model, 50, 78).samples());
}

TEST(ProjectionDistanceTest, IdentityIsZero) {
  const Eigen::MatrixXd u = RandomOrthonormal(6, 2, 4);
  EXPECT_NEAR(ProjectionDistance(u, u), 0.0, 1e-7);
}

TEST(ProjectionDistanceTest, OrthogonalLinesGiveSqrtTwo) {
  EXPECT_NEAR(ProjectionDistance(Canonical(3, {0}), Canonical(3, {2})),
              1.41421356237309505, 1e-15);
}

TEST(ProjectionDistanceTest, MatchesExplicitProjectorDifference) {
  const Eigen::MatrixXd u1 = RandomOrthonormal(6, 2, 21);
  const Eigen::MatrixXd u2 = RandomOrthonormal(6, 2, 22);
  const double explicit_norm =
      (u1 * u1.transpose() - u2 * u2.transpose()).norm();
  EXPECT_NEAR(ProjectionDistance(u1, u2), explicit_norm, 1e-10);
}

TEST(ProjectionDistanceTest, ShapeMismatchRejected) {
  EXPECT_THROW(ProjectionDistance(Canonical(3, {0}), Canonical(4, {0})),
               DimensionError);
  EXPECT_THROW(ProjectionDistance(Canonical(3, {0}), Canonical(3, {0, 1})),
               DimensionError);
}

TEST(DatasetTest, RejectsNonFinite) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 3);
  x(1, 2) = std::nan("");
  EXPECT_THROW(Dataset{x}, InvalidArgument);
  EXPECT_THROW(Dataset{Eigen::MatrixXd(2, 0)}, DimensionError);
}

TEST(DatasetTest, CenteredHasZeroMean) {
  const SpikedModel model = SpikedModel::WithRandomBasis(4, 1, 3.0, 1.0, 1);
  Eigen::MatrixXd x = Sample(model, 30, 2).samples();
  x.colwise() += Eigen::Vector4d(5, -2, 1, 0);
  const Dataset c = Dataset(x).Centered();
  EXPECT_LE(c.samples().rowwise().mean().norm(), 1e-12);
}

TEST(DatasetCsvTest, RoundTripIsExact) {
  const SpikedModel model = SpikedModel::WithRandomBasis(3, 1, 3.0, 1.0, 1);
  const Dataset data = Sample(model, 7, 2);
  const auto path = std::filesystem::temp_directory_path() / "fedspike_rt.csv";
  WriteDatasetCsv(data, path);
  const Dataset back = ReadDatasetCsv(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.samples(), data.samples());
}

TEST(DatasetCsvTest, HeaderAndRaggedRows) {
  const auto path = std::filesystem::temp_directory_path() / "fedspike_h.csv";
  {
    std::ofstream out(path);
    out << "a,b\n1,2\n3,4\n5,6\n";
  }
  const Dataset data = ReadDatasetCsv(path, /*header=*/true);
  EXPECT_EQ(data.dim(), 2);
  EXPECT_EQ(data.size(), 3);
  EXPECT_EQ(data.samples()(1, 2), 6.0);
  {
    std::ofstream out(path);
    out << "1,2\n3\n";
  }
  EXPECT_THROW(ReadDatasetCsv(path), DimensionError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace fedspike
