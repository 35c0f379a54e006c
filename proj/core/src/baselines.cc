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

#include "fedspike/baselines.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fedspike/error.h"
#include "fedspike/server.h"

namespace fedspike {
namespace {

// Thin Q factor with a deterministic sign (positive diag(R)).
void Orthonormalize(Eigen::MatrixXd& v) {
  if (v.cols() == 1) {
    const double norm = v.norm();
    if (norm > 0.0 && std::isfinite(norm)) v /= norm;
    return;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(v.rows(), v.cols());
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    if (qr.matrixQR()(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  v = std::move(q);
}

}  // namespace

void ValidateOjaConfig(const OjaConfig& cfg) {
  if (!(cfg.initial_step > 0.0)) throw InvalidArgument("Oja step must be > 0");
  if (cfg.decay < 0.0) throw InvalidArgument("Oja decay must be >= 0");
  if (cfg.rank < 1) throw InvalidArgument("Oja rank must be >= 1");
  if (cfg.passes < 1) throw InvalidArgument("Oja passes must be >= 1");
  if (cfg.noise_per_step && !(*cfg.noise_per_step >= 0.0)) {
    throw InvalidArgument("Oja noise variance must be >= 0");
  }
  if (cfg.clip_norm && !(*cfg.clip_norm > 0.0)) {
    throw InvalidArgument("Oja clip norm must be > 0");
  }
}

double OjaNoiseStddev(const PrivacyBudget& budget, long long updates,
                      double clip_norm) {
  const double sensitivity = 2.0 * clip_norm * clip_norm;
  return sensitivity *
         std::sqrt(2.0 * std::log(1.25 / budget.delta()) *
                   static_cast<double>(updates)) /
         budget.epsilon();
}

double DefaultOjaClip(int p, double lambda, double sigma2) {
  return 3.0 * std::sqrt(lambda + sigma2 * p);
}

Eigen::MatrixXd OjaClientSubspace(const Dataset& data, const OjaConfig& cfg,
                                  const PrivacyBudget& budget, double lambda,
                                  double sigma2, Seed seed) {
  ValidateOjaConfig(cfg);
  const int p = data.dim();
  const int r = cfg.rank;
  if (r > p) throw DimensionError("Oja rank exceeds dimension");
  const double clip = cfg.clip_norm.value_or(DefaultOjaClip(p, lambda, sigma2));
  const long long updates = static_cast<long long>(data.size()) * cfg.passes;
  const double noise_sd = cfg.noise_per_step
                              ? std::sqrt(*cfg.noise_per_step)
                              : OjaNoiseStddev(budget, updates, clip);

  Engine init(DeriveSeed(seed, "oja-init"));
  Eigen::MatrixXd v = StandardNormalMatrix(p, r, init);
  Orthonormalize(v);

  Engine noise(DeriveSeed(seed, "oja-noise"));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(p);
  Eigen::MatrixXd step(p, r);
  long long t = 0;
  for (int pass = 0; pass < cfg.passes; ++pass) {
    for (int i = 0; i < data.size(); ++i) {
      ++t;
      x = data.samples().col(i);
      const double norm = x.norm();
      if (norm > clip) x *= clip / norm;
      const double eta =
          cfg.initial_step * std::pow(static_cast<double>(t), -cfg.decay);
      step.noalias() = x * (x.transpose() * v);
      if (noise_sd > 0.0) {
        for (Eigen::Index k = 0; k < step.size(); ++k) {
          step.data()[k] += noise_sd * normal(noise);
        }
      }
      v += eta * step;
      Orthonormalize(v);
    }
  }
  return v;
}

Eigen::MatrixXd FedDpOja(std::span<const Dataset> datasets,
                         const OjaConfig& cfg,
                         std::span<const PrivacyBudget> budgets, double lambda,
                         double sigma2, Seed seed) {
  if (datasets.empty()) throw InvalidArgument("Fed-DP-Oja needs >= 1 client");
  if (budgets.size() != datasets.size()) {
    throw DimensionError("Fed-DP-Oja: one budget per client required");
  }
  std::vector<Eigen::MatrixXd> bases;
  bases.reserve(datasets.size());
  for (std::size_t j = 0; j < datasets.size(); ++j) {
    if (datasets[j].dim() != datasets.front().dim()) {
      throw DimensionError("Fed-DP-Oja: clients disagree on p");
    }
    bases.push_back(OjaClientSubspace(datasets[j], cfg, budgets[j], lambda,
                                      sigma2, DeriveSeed(seed, "oja-client", j)));
  }
  std::vector<double> w(bases.size(), 1.0 / static_cast<double>(bases.size()));
  return AggregateBases(bases, w);
}

Eigen::MatrixXd EqualWeightAggregate(std::span<const ProjectorMessage> messages) {
  if (messages.empty()) throw InvalidArgument("nothing to aggregate");
  std::vector<ClientParams> params;
  for (const ProjectorMessage& m : messages) {
    params.push_back({m.client_id, std::max(m.n, 2),
                      PrivacyBudget(m.epsilon, m.delta)});
  }
  const int p = static_cast<int>(messages.front().u_hat.rows());
  const int r = static_cast<int>(messages.front().u_hat.cols());
  AggregationWeights w =
      ComputeWeights(params, p, r, 1.0, 1.0, WeightScheme::kEqual);
  return AggregateProjectors(messages, w);
}

}  // namespace fedspike
