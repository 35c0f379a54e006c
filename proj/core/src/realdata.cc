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

#include <algorithm>
#include <numeric>
#include <optional>

#include "fedspike/client.h"
#include "fedspike/error.h"
#include "fedspike/session.h"
#include "fedspike/spectral.h"
#include "fedspike/transport.h"

namespace fedspike {
namespace {

std::string ClientName(std::size_t j) { return "client-" + std::to_string(j + 1); }

Eigen::MatrixXd RunSession(const std::vector<Dataset>& blocks,
                           const std::vector<ClientConfig>& configs,
                           const ServerConfig& server_cfg) {
  std::vector<ClientHandle> handles;
  handles.reserve(blocks.size());
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    handles.emplace_back(blocks[j], configs[j]);
  }
  std::vector<ClientHandle*> ptrs;
  for (auto& h : handles) ptrs.push_back(&h);
  InProcessTransport transport;
  CentralServer server(server_cfg);
  return RunFederatedSession(ptrs, server, transport).u_hat;
}

}  // namespace

double RealdataReport::explained_variance(std::string_view method) const {
  for (const auto& m : methods) {
    if (m.method == method) return m.explained_variance;
  }
  throw InvalidArgument("no result for method '" + std::string(method) + "'");
}

RealdataReport RunRealdata(const Dataset& data, const RealdataSpec& spec) {
  if (spec.client_sizes.empty()) throw InvalidArgument("no client sizes given");
  long long needed = 0;
  for (int n : spec.client_sizes) {
    if (n < std::max(spec.rank, 2)) {
      throw InvalidArgument("every client needs at least max(r, 2) samples");
    }
    needed += n;
  }
  if (needed > data.size()) {
    throw InvalidArgument("data has " + std::to_string(data.size()) +
                          " samples but the split needs " +
                          std::to_string(needed));
  }
  if (spec.rank < 1 || spec.rank > data.dim()) {
    throw InvalidArgument("rank must lie in [1, p]");
  }
  const PrivacyBudget budget(spec.epsilon, spec.delta);

  RealdataReport report;
  report.permutation.resize(data.size());
  std::iota(report.permutation.begin(), report.permutation.end(), 0);
  Engine engine(DeriveSeed(spec.seed, "shuffle"));
  std::shuffle(report.permutation.begin(), report.permutation.end(), engine);

  const Dataset pooled = data.Centered();
  report.pooled_explained_variance =
      ExplainedVariance(TopSubspace(SampleCovariance(pooled), spec.rank), data);
  std::optional<PluginEstimate> shared;
  if (spec.pooled_plugins) {
    shared = EstimatePlugins(pooled, spec.top_k, spec.tail, spec.subtract_noise);
  }

  std::vector<Dataset> blocks;
  std::vector<ClientConfig> configs;
  std::vector<PrivacyBudget> budgets;
  int offset = 0;
  double total = 0.0;
  for (std::size_t j = 0; j < spec.client_sizes.size(); ++j) {
    const int n = spec.client_sizes[j];
    Eigen::MatrixXd x(data.dim(), n);
    for (int i = 0; i < n; ++i) {
      x.col(i) = pooled.samples().col(report.permutation[offset + i]);
    }
    offset += n;
    blocks.emplace_back(std::move(x), ClientName(j));
    PluginEstimate est;
    try {
      est = shared ? *shared
                   : EstimatePlugins(blocks.back(), spec.top_k, spec.tail,
                                     spec.subtract_noise);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(ClientName(j) + ": " + e.what());
    }
    // Calibration needs lambda > 0; a weak top block can make the
    // noise-subtracted estimate vanish.
    est.lambda_hat = std::max(est.lambda_hat, 1e-8 * est.sigma2_hat);
    report.client_plugins.push_back(est);
    report.server_plugins.lambda_hat += n * est.lambda_hat;
    report.server_plugins.sigma2_hat += n * est.sigma2_hat;
    total += n;

    ClientConfig cfg;
    cfg.client_id = ClientName(j);
    cfg.budget = budget;
    cfg.rank = spec.rank;
    cfg.lambda_plugin = est.lambda_hat;
    cfg.sigma2_plugin = est.sigma2_hat;
    cfg.share_plugins = !spec.pooled_plugins;
    cfg.seed = DeriveSeed(spec.seed, "client", j);
    configs.push_back(std::move(cfg));
    budgets.push_back(budget);
  }
  report.server_plugins.lambda_hat /= total;
  report.server_plugins.sigma2_hat /= total;
  const double lambda = report.server_plugins.lambda_hat;
  const double sigma2 = report.server_plugins.sigma2_hat;

  ServerConfig server_cfg;
  server_cfg.rank = spec.rank;
  server_cfg.lambda = lambda;
  server_cfg.sigma2 = sigma2;
  server_cfg.allow_dropout = spec.allow_dropout;

  for (Method method : spec.methods) {
    Eigen::MatrixXd u_hat;
    switch (method) {
      case Method::kFedSpike:
        server_cfg.scheme = spec.main_scheme;
        u_hat = RunSession(blocks, configs, server_cfg);
        break;
      case Method::kEqual:
        server_cfg.scheme = WeightScheme::kEqual;
        u_hat = RunSession(blocks, configs, server_cfg);
        break;
      case Method::kReference: {
        std::vector<Eigen::MatrixXd> noisy;
        for (std::size_t j = 0; j < blocks.size(); ++j) {
          noisy.push_back(NoisyLocalProjector(
              ComputeLocalSpectrum(blocks[j], spec.rank), configs[j]));
        }
        std::vector<double> w(blocks.size(), 1.0 / blocks.size());
        u_hat = AggregateReference(noisy, w, spec.rank);
        break;
      }
      case Method::kOja: {
        OjaConfig cfg = spec.oja;
        cfg.rank = spec.rank;
        u_hat = FedDpOja(blocks, cfg, budgets, lambda, sigma2,
                         DeriveSeed(spec.seed, "oja"));
        break;
      }
    }
    report.methods.push_back(
        {std::string(MethodName(method)), ExplainedVariance(u_hat, data)});
  }
  return report;
}

Dataset SyntheticStandIn(int p, int n, int r, Seed seed) {
  if (r < 1 || r > p) throw InvalidArgument("stand-in needs 1 <= r <= p");
  Eigen::VectorXd spikes(r);
  for (int k = 0; k < r; ++k) spikes(k) = 1e4 * (r - k);
  SpikedModel model(RandomOrthonormal(p, r, DeriveSeed(seed, "basis")),
                    spikes, 1.0);
  return Sample(model, n, DeriveSeed(seed, "samples"));
}

}  // namespace fedspike
