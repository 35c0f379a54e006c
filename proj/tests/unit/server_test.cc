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

#include "fedspike/server.h"

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "../oracles/jacobi_eigen.h"
#include "fedspike/error.h"
#include "fedspike/random.h"
#include "fedspike/spectral.h"
#include "fedspike/spiked_model.h"

namespace fedspike {
namespace {

// 40-digit evaluations of the weight formulas.
constexpr double kTwoClientOptimal[] = {0.029994855245330409244,
                                        0.97000514475466959076};
constexpr double kTwoClientAsPrinted[] = {0.8504503706194560464,
                                          0.1495496293805439536};
constexpr double kTwoClientCov[] = {0.022819293458696158286,
                                    0.97718070654130384171};
constexpr double kHetOptimal[] = {0.0018167532601087323409,
                                  0.017174414068419561982,
                                  0.42023167761469071782,
                                  0.56077715505678098786};
constexpr double kHetCov[] = {0.0014024969086612160015,
                              0.015885018466669290511,
                              0.40518476071977311903,
                              0.57752772390489637446};

std::vector<ClientParams> TwoClients() {
  return {{"a", 1000, PrivacyBudget(0.5, 0.1)},
          {"b", 10000, PrivacyBudget(0.5, 0.1)}};
}

std::vector<ClientParams> Heterogeneous() {
  return {{"c0", 200, PrivacyBudget(0.1, 0.1)},
          {"c1", 200, PrivacyBudget(0.3, 0.2)},
          {"c2", 2000, PrivacyBudget(0.2, 0.15)},
          {"c3", 2000, PrivacyBudget(0.25, 0.12)}};
}

double Sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

TEST(WeightsTest, IdenticalClientsGiveUniformWeights) {
  std::vector<ClientParams> same;
  for (int k = 0; k < 7; ++k) {
    same.push_back({"c" + std::to_string(k), 3000, PrivacyBudget(0.4, 0.1)});
  }
  for (WeightScheme s : {WeightScheme::kOptimal, WeightScheme::kDataIndependent,
                         WeightScheme::kDataIndependentAsPrinted,
                         WeightScheme::kEqual}) {
    for (double w : PcaWeights(same, 50, 1, 10.0, 1.0, s)) {
      EXPECT_DOUBLE_EQ(w, 1.0 / 7.0);
    }
  }
  for (double v : CovWeights(same, 50, 1, 10.0, 1.0)) EXPECT_DOUBLE_EQ(v, 1.0 / 7.0);
}

TEST(WeightsTest, LargerClientWeighsMore) {
  const std::vector<ClientParams> c{{"a", 20000, PrivacyBudget(0.5, 0.1)},
                                    {"b", 1000, PrivacyBudget(0.5, 0.1)}};
  for (WeightScheme s : {WeightScheme::kOptimal, WeightScheme::kDataIndependent}) {
    const auto w = PcaWeights(c, 50, 1, 10.0, 1.0, s);
    EXPECT_GT(w[0], w[1]);
  }
  const auto v = CovWeights(c, 50, 1, 10.0, 1.0);
  EXPECT_GT(v[0], v[1]);
}

TEST(WeightsTest, PinnedTwoClient) {
  const auto c = TwoClients();
  const auto w = PcaWeights(c, 50, 1, 10.0, 1.0, WeightScheme::kOptimal);
  const auto di = PcaWeights(c, 50, 1, 10.0, 1.0, WeightScheme::kDataIndependent);
  const auto lit =
      PcaWeights(c, 50, 1, 10.0, 1.0, WeightScheme::kDataIndependentAsPrinted);
  const auto v = CovWeights(c, 50, 1, 10.0, 1.0);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(w[k], kTwoClientOptimal[k], 1e-15);
    // For r = 1 the data-independent bracket is proportional to Psi0~.
    EXPECT_NEAR(di[k], kTwoClientOptimal[k], 1e-15);
    EXPECT_NEAR(lit[k], kTwoClientAsPrinted[k], 1e-15);
    EXPECT_NEAR(v[k], kTwoClientCov[k], 1e-15);
  }
}

TEST(WeightsTest, PinnedHeterogeneous) {
  const auto c = Heterogeneous();
  const auto w = PcaWeights(c, 50, 1, 10.0, 1.0, WeightScheme::kOptimal);
  const auto v = CovWeights(c, 50, 1, 10.0, 1.0);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(w[k], kHetOptimal[k], 1e-15);
    EXPECT_NEAR(v[k], kHetCov[k], 1e-15);
  }
  EXPECT_NEAR(Sum(w), 1.0, 1e-12);
  EXPECT_NEAR(Sum(v), 1.0, 1e-12);
}

TEST(WeightsTest, PerClientPluginsOverrideShared) {
  auto c = TwoClients();
  c[1].lambda = 4.0;
  c[1].sigma2 = 2.5;
  // Shared values (10, 1) still apply to client "a".
  const auto w = PcaWeights(c, 50, 1, 10.0, 1.0, WeightScheme::kOptimal);
  const auto v = CovWeights(c, 50, 1, 10.0, 1.0);
  constexpr double kW[] = {0.26343972758433843764, 0.73656027241566156236};
  constexpr double kV[] = {0.01959354403893042335, 0.98040645596106957665};
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(w[k], kW[k], 1e-15);
    EXPECT_NEAR(v[k], kV[k], 1e-15);
  }
  // Plug-ins equal to the shared values change nothing.
  auto same = TwoClients();
  for (auto& x : same) {
    x.lambda = 10.0;
    x.sigma2 = 1.0;
  }
  EXPECT_EQ(PcaWeights(same, 50, 1, 10.0, 1.0, WeightScheme::kOptimal),
            PcaWeights(TwoClients(), 50, 1, 10.0, 1.0, WeightScheme::kOptimal));
}

TEST(WeightsTest, CovWeightsProportionalToNWithoutPrivacy) {
  const std::vector<ClientParams> c{{"a", 100, PrivacyBudget(1e12, 0.1)},
                                    {"b", 300, PrivacyBudget(1e12, 0.1)}};
  const auto v = CovWeights(c, 50, 1, 10.0, 1.0);
  EXPECT_NEAR(v[0], 0.25, 1e-9);
  EXPECT_NEAR(v[1], 0.75, 1e-9);
}

TEST(WeightsTest, ComputeWeightsSortsById) {
  std::vector<ClientParams> c = TwoClients();
  std::swap(c[0], c[1]);
  const AggregationWeights w =
      ComputeWeights(c, 50, 1, 10.0, 1.0, WeightScheme::kOptimal);
  ASSERT_EQ(w.client_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_NEAR(w.pca_weight("a"), kTwoClientOptimal[0], 1e-15);
  EXPECT_NEAR(w.cov_weight("b"), kTwoClientCov[1], 1e-15);
  EXPECT_THROW(w.pca_weight("zz"), InvalidArgument);
  c[1].client_id = c[0].client_id;
  EXPECT_THROW(ComputeWeights(c, 50, 1, 10.0, 1.0, WeightScheme::kOptimal),
               InvalidArgument);
}

TEST(WeightsTest, EqualSchemeAppliesToCovarianceToo) {
  const AggregationWeights w =
      ComputeWeights(TwoClients(), 50, 1, 10.0, 1.0, WeightScheme::kEqual);
  EXPECT_EQ(w.pca, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(w.cov, (std::vector<double>{0.5, 0.5}));
}

TEST(WeightSchemeTest, NamesRoundTrip) {
  for (WeightScheme s : {WeightScheme::kOptimal, WeightScheme::kDataIndependent,
                         WeightScheme::kDataIndependentAsPrinted,
                         WeightScheme::kEqual}) {
    EXPECT_EQ(ParseWeightScheme(WeightSchemeName(s)), s);
  }
  EXPECT_THROW(ParseWeightScheme("best"), InvalidArgument);
}

TEST(AggregateBasesTest, SingleBasis) {
  const Eigen::MatrixXd u = RandomOrthonormal(9, 2, 1);
  const std::vector<Eigen::MatrixXd> bases{u};
  const std::vector<double> w{1.0};
  EXPECT_LE(ProjectionDistance(AggregateBases(bases, w), u), 1e-8);
}

TEST(AggregateBasesTest, IdenticalBases) {
  const Eigen::MatrixXd u = RandomOrthonormal(9, 2, 2);
  const std::vector<Eigen::MatrixXd> bases(4, u);
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  EXPECT_LE(ProjectionDistance(AggregateBases(bases, w), u), 1e-8);
}

TEST(AggregateBasesTest, TwoByTwoClosedForm) {
  // (1/2) e1 e1^T + (1/2) u2 u2^T with u2 = (e1 + e2)/sqrt 2 has leading
  // eigenvector (cos pi/8, sin pi/8).
  Eigen::MatrixXd u1(2, 1), u2(2, 1);
  u1 << 1, 0;
  u2 << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const std::vector<Eigen::MatrixXd> bases{u1, u2};
  const std::vector<double> w{0.5, 0.5};
  const Eigen::MatrixXd u = AggregateBases(bases, w);
  Eigen::MatrixXd want(2, 1);
  want << 0.92387953251128675613, 0.38268343236508977173;
  EXPECT_NEAR(std::abs(u.col(0).dot(want.col(0))), 1.0, 1e-15);
  EXPECT_LE((u * u.transpose() - want * want.transpose()).norm(), 1e-14);
}

TEST(AggregateBasesTest, MatchesOracleOnSmallInstances) {
  Engine engine(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 3 + trial % 4;
    const int r = 1 + trial % 2;
    std::vector<Eigen::MatrixXd> bases;
    std::vector<double> w;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < 3; ++j) {
      bases.push_back(RandomOrthonormal(p, r, engine()));
      w.push_back(1.0 + j);
    }
    for (double& x : w) x /= 6.0;
    for (int j = 0; j < 3; ++j) sum += w[j] * bases[j] * bases[j].transpose();
    const Eigen::MatrixXd u = AggregateBases(bases, w);
    EXPECT_LE((u * u.transpose() - oracle::TopProjector(sum, r)).norm(), 1e-10);
  }
}

TEST(AggregateBasesTest, RejectsMismatch) {
  const std::vector<Eigen::MatrixXd> bases{RandomOrthonormal(4, 1, 1),
                                           RandomOrthonormal(5, 1, 2)};
  const std::vector<double> w{0.5, 0.5};
  EXPECT_THROW(AggregateBases(bases, w), DimensionError);
  const std::vector<Eigen::MatrixXd> one{bases[0]};
  EXPECT_THROW(AggregateBases(one, w), DimensionError);
}

TEST(AggregateProjectorsTest, IndependentOfArrivalOrder) {
  std::vector<ProjectorMessage> msgs;
  std::vector<ClientParams> params;
  for (int j = 0; j < 4; ++j) {
    ProjectorMessage m;
    m.client_id = "c" + std::to_string(j);
    m.u_hat = RandomOrthonormal(6, 2, 40 + j);
    m.n = 100 * (j + 1);
    m.epsilon = 0.5;
    m.delta = 0.1;
    params.push_back({m.client_id, m.n, PrivacyBudget(0.5, 0.1)});
    msgs.push_back(std::move(m));
  }
  const AggregationWeights w =
      ComputeWeights(params, 6, 2, 10.0, 1.0, WeightScheme::kOptimal);
  const Eigen::MatrixXd a = AggregateProjectors(msgs, w);
  std::reverse(msgs.begin(), msgs.end());
  EXPECT_EQ(AggregateProjectors(msgs, w), a);
}

TEST(AssembleCovarianceTest, ReconstructsTruth) {
  const SpikedModel model = SpikedModel::WithRandomBasis(7, 2, 5.0, 0.5, 3);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(2, 2);
  lambda.diagonal() = model.spikes();
  const std::vector<Eigen::MatrixXd> blocks(3, lambda);
  const std::vector<double> v{0.2, 0.3, 0.5};
  const Eigen::MatrixXd s = AssembleCovariance(model.basis(), blocks, v, 0.5);
  EXPECT_LE((s - CovarianceMatrix(model)).norm(), 1e-12);
}

TEST(AssembleCovarianceTest, PointMassWeights) {
  const Eigen::MatrixXd u = RandomOrthonormal(5, 2, 6);
  Eigen::MatrixXd l0(2, 2), l1(2, 2);
  l0 << 3, 0.5, 0.5, 1;
  l1 << 9, 0, 0, 9;
  const std::vector<Eigen::MatrixXd> blocks{l0, l1};
  const std::vector<double> v{1.0, 0.0};
  const Eigen::MatrixXd s = AssembleCovariance(u, blocks, v, 2.0);
  const Eigen::MatrixXd want =
      u * l0 * u.transpose() + 2.0 * Eigen::MatrixXd::Identity(5, 5);
  EXPECT_LE((s - want).norm(), 1e-13);
  EXPECT_EQ(s, s.transpose());
}

TEST(AssembleCovarianceTest, PsdClip) {
  const Eigen::MatrixXd u = RandomOrthonormal(4, 1, 6);
  const std::vector<Eigen::MatrixXd> blocks{Eigen::MatrixXd::Constant(1, 1, -3.0)};
  const std::vector<double> v{1.0};
  const Eigen::MatrixXd clipped = AssembleCovariance(u, blocks, v, 1.0, true);
  EXPECT_LE((clipped - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-14);
  const Eigen::MatrixXd raw = AssembleCovariance(u, blocks, v, 1.0, false);
  EXPECT_LT(SymEig(raw).values.minCoeff(), 0.0);
}

TEST(AggregateReferenceTest, SingleNoisyMatrix) {
  Engine engine(4);
  Eigen::MatrixXd g = StandardNormalMatrix(6, 6, engine);
  const Eigen::MatrixXd m = g + g.transpose();
  const std::vector<Eigen::MatrixXd> noisy{m};
  const std::vector<double> w{1.0};
  EXPECT_LE(ProjectionDistance(AggregateReference(noisy, w, 2), TopSubspace(m, 2)),
            1e-10);
}

}  // namespace
}  // namespace fedspike
