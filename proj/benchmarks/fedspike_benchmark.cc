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

#include <vector>

#include <benchmark/benchmark.h>

#include "fedspike/client.h"
#include "fedspike/protocol.h"
#include "fedspike/random.h"
#include "fedspike/server.h"
#include "fedspike/spectral.h"
#include "fedspike/spiked_model.h"

namespace fedspike {
namespace {

void BM_SymEig(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  Engine engine(1);
  Eigen::MatrixXd g = StandardNormalMatrix(p, p, engine);
  const Eigen::MatrixXd m = g + g.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(SymEig(m));
}
BENCHMARK(BM_SymEig)->Arg(50)->Arg(251)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Sample(benchmark::State& state) {
  const SpikedModel model = SpikedModel::WithRandomBasis(50, 1, 10.0, 1.0, 1);
  const int n = static_cast<int>(state.range(0));
  Seed seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(Sample(model, n, ++seed));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Sample)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SampleCovariance(benchmark::State& state) {
  const SpikedModel model = SpikedModel::WithRandomBasis(50, 1, 10.0, 1.0, 1);
  const Dataset data = Sample(model, static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(SampleCovariance(data));
}
BENCHMARK(BM_SampleCovariance)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_LocalPrivateProjector(benchmark::State& state) {
  const SpikedModel model = SpikedModel::WithRandomBasis(50, 1, 10.0, 1.0, 1);
  const Dataset data = Sample(model, 10000, 2);
  const LocalSpectrum spectrum = ComputeLocalSpectrum(data, 1);
  ClientConfig cfg;
  cfg.client_id = "bench";
  cfg.budget = PrivacyBudget(0.5, 0.1);
  cfg.lambda_plugin = 10.0;
  cfg.sigma2_plugin = 1.0;
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(LocalPrivateProjector(spectrum, cfg));
  }
}
BENCHMARK(BM_LocalPrivateProjector)->Unit(benchmark::kMicrosecond);

void BM_AggregateProjectors(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::vector<ProjectorMessage> msgs;
  std::vector<ClientParams> params;
  for (int j = 0; j < m; ++j) {
    ProjectorMessage msg;
    msg.client_id = "c" + std::to_string(1000 + j);
    msg.u_hat = RandomOrthonormal(50, 1, j);
    msg.n = 1000 + j;
    msg.epsilon = 0.5;
    msg.delta = 0.1;
    params.push_back({msg.client_id, msg.n, PrivacyBudget(0.5, 0.1)});
    msgs.push_back(std::move(msg));
  }
  const AggregationWeights w =
      ComputeWeights(params, 50, 1, 10.0, 1.0, WeightScheme::kOptimal);
  for (auto _ : state) benchmark::DoNotOptimize(AggregateProjectors(msgs, w));
}
BENCHMARK(BM_AggregateProjectors)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_EncodeDecode(benchmark::State& state) {
  ProjectorMessage msg;
  msg.client_id = "bench";
  msg.u_hat = RandomOrthonormal(251, 5, 3);
  msg.n = 130;
  msg.epsilon = 0.4;
  msg.delta = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(DecodeAs<ProjectorMessage>(Encode(msg)));
  }
}
BENCHMARK(BM_EncodeDecode)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace fedspike

BENCHMARK_MAIN();
