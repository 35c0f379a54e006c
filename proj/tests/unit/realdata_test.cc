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

#include "fedspike/realdata.h"

#include <gtest/gtest.h>

#include "fedspike/error.h"

namespace fedspike {
namespace {

TEST(RealdataTest, MainMethodBeatsEqualWeightsOnStandIn) {
  RealdataSpec spec;
  spec.methods = {Method::kFedSpike, Method::kEqual};
  int wins = 0;
  for (Seed s = 0; s < 25; ++s) {
    const Dataset data = SyntheticStandIn(251, 181, 5, 1000 + s);
    spec.seed = s;
    const RealdataReport report = RunRealdata(data, spec);
    if (report.explained_variance("fedspike") >=
        report.explained_variance("equal")) {
      ++wins;
    }
  }
  EXPECT_GE(wins, 15) << "wins out of 25";
}

TEST(RealdataTest, PluginsPerClientOrPooled) {
  const Dataset data = SyntheticStandIn(30, 60, 2, 3);
  RealdataSpec spec;
  spec.client_sizes = {40, 20};
  spec.rank = 2;
  spec.tail = {10, 20};
  spec.methods = {Method::kFedSpike};
  const RealdataReport own = RunRealdata(data, spec);
  ASSERT_EQ(own.client_plugins.size(), 2u);
  EXPECT_NE(own.client_plugins[0].sigma2_hat, own.client_plugins[1].sigma2_hat);
  EXPECT_NEAR(own.server_plugins.sigma2_hat,
              (40 * own.client_plugins[0].sigma2_hat +
               20 * own.client_plugins[1].sigma2_hat) / 60,
              1e-12 * own.server_plugins.sigma2_hat);

  spec.pooled_plugins = true;
  const RealdataReport pooled = RunRealdata(data, spec);
  EXPECT_EQ(pooled.client_plugins[0].sigma2_hat,
            pooled.client_plugins[1].sigma2_hat);
  EXPECT_DOUBLE_EQ(pooled.server_plugins.sigma2_hat,
                   pooled.client_plugins[0].sigma2_hat);
}

TEST(RealdataTest, FullRankExplainsEverything) {
  const Dataset data = SyntheticStandIn(6, 20, 2, 3);
  RealdataSpec spec;
  spec.client_sizes = {12, 8};
  spec.rank = 6;
  spec.tail = {4, 6};
  spec.methods = {Method::kFedSpike, Method::kEqual, Method::kReference};
  const RealdataReport report = RunRealdata(data, spec);
  for (const auto& m : report.methods) {
    EXPECT_NEAR(m.explained_variance, 1.0, 1e-12) << m.method;
  }
}

TEST(RealdataTest, DeterministicGivenSeed) {
  const Dataset data = SyntheticStandIn(30, 60, 2, 3);
  RealdataSpec spec;
  spec.client_sizes = {40, 20};
  spec.rank = 2;
  spec.tail = {10, 30};
  const RealdataReport a = RunRealdata(data, spec);
  const RealdataReport b = RunRealdata(data, spec);
  EXPECT_EQ(a.permutation, b.permutation);
  ASSERT_EQ(a.methods.size(), 4u);
  for (std::size_t k = 0; k < a.methods.size(); ++k) {
    EXPECT_EQ(a.methods[k].explained_variance, b.methods[k].explained_variance);
  }
  spec.seed += 1;
  EXPECT_NE(RunRealdata(data, spec).permutation, a.permutation);
}

TEST(RealdataTest, SplitLargerThanData) {
  const Dataset data = SyntheticStandIn(10, 30, 2, 3);
  RealdataSpec spec;
  spec.client_sizes = {20, 20};
  spec.rank = 2;
  spec.tail = {3, 10};
  EXPECT_THROW(RunRealdata(data, spec), InvalidArgument);
}

}  // namespace
}  // namespace fedspike
