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

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>

#include "fedspike/error.h"
#include "fedspike/rates.h"
#include "fedspike/spectral.h"

namespace fedspike {
namespace {

std::vector<double> Normalized(std::vector<double> raw) {
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("aggregation weights do not normalize");
  }
  for (double& v : raw) v /= total;
  return raw;
}

void CheckClients(std::span<const ClientParams> clients) {
  if (clients.empty()) throw InvalidArgument("need at least one client");
  for (const ClientParams& c : clients) {
    if (c.n < 2) {
      throw InvalidArgument("client " + c.client_id + " needs n >= 2");
    }
  }
}

void CheckWeights(std::size_t count, std::span<const double> weights) {
  if (count == 0) throw InvalidArgument("nothing to aggregate");
  if (weights.size() != count) {
    throw DimensionError("got " + std::to_string(weights.size()) +
                         " weights for " + std::to_string(count) + " inputs");
  }
}

std::size_t IndexOf(const std::vector<std::string>& ids, std::string_view id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) {
    throw InvalidArgument("no aggregation weight for client '" +
                          std::string(id) + "'");
  }
  return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

std::string_view WeightSchemeName(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::kOptimal: return "optimal";
    case WeightScheme::kDataIndependent: return "data_independent";
    case WeightScheme::kDataIndependentAsPrinted: return "as_printed";
    case WeightScheme::kEqual: return "equal";
  }
  return "unknown";
}

WeightScheme ParseWeightScheme(std::string_view name) {
  if (name == "optimal") return WeightScheme::kOptimal;
  if (name == "data_independent") return WeightScheme::kDataIndependent;
  if (name == "as_printed") return WeightScheme::kDataIndependentAsPrinted;
  if (name == "equal") return WeightScheme::kEqual;
  throw InvalidArgument("unknown weight scheme '" + std::string(name) + "'");
}

double AggregationWeights::pca_weight(std::string_view id) const {
  return pca[IndexOf(client_ids, id)];
}

double AggregationWeights::cov_weight(std::string_view id) const {
  return cov[IndexOf(client_ids, id)];
}

std::vector<double> PcaWeights(std::span<const ClientParams> clients, int p,
                               int r, double lambda, double sigma2,
                               WeightScheme scheme) {
  CheckClients(clients);
  const std::size_t m = clients.size();
  if (scheme == WeightScheme::kEqual) {
    return std::vector<double>(m, 1.0 / static_cast<double>(m));
  }
  std::vector<double> raw;
  raw.reserve(m);
  for (const ClientParams& c : clients) {
    const double n = c.n;
    const double eps = c.budget.epsilon();
    if (scheme == WeightScheme::kOptimal) {
      const double psi =
          Psi0Tilde({c.n, eps, c.budget.delta(), p, r, c.lambda.value_or(lambda),
                     c.sigma2.value_or(sigma2)});
      raw.push_back(1.0 / (psi * psi));
      continue;
    }
    const double rate =
        std::sqrt(p / n) +
        p / (n * eps) *
            std::sqrt((r + std::log(n)) * std::log(2.5 / c.budget.delta()));
    raw.push_back(scheme == WeightScheme::kDataIndependent
                      ? 1.0 / (rate * rate)
                      : rate);
  }
  return Normalized(std::move(raw));
}

std::vector<double> CovWeights(std::span<const ClientParams> clients, int p,
                               int r, double lambda, double sigma2) {
  CheckClients(clients);
  std::vector<double> raw;
  raw.reserve(clients.size());
  for (const ClientParams& c : clients) {
    const double l = c.lambda.value_or(lambda);
    const double s = c.sigma2.value_or(sigma2);
    const double l2 = l * l;
    const double s4 = s * s;
    const double n = c.n;
    const double eps = c.budget.epsilon();
    const double log_term = r + std::log(n);
    const double variance =
        (l2 + s4) / n + 8.0 / (eps * eps) * std::log(2.5 / c.budget.delta()) *
                            (l2 * log_term * log_term +
                             s4 * static_cast<double>(p) * p) /
                            (n * n);
    raw.push_back(1.0 / variance);
  }
  return Normalized(std::move(raw));
}

AggregationWeights ComputeWeights(std::span<const ClientParams> clients, int p,
                                  int r, double lambda, double sigma2,
                                  WeightScheme scheme) {
  std::vector<ClientParams> sorted(clients.begin(), clients.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ClientParams& a, const ClientParams& b) {
                     return a.client_id < b.client_id;
                   });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].client_id == sorted[k - 1].client_id) {
      throw InvalidArgument("duplicate client id '" + sorted[k].client_id +
                            "'");
    }
  }
  AggregationWeights out;
  out.scheme = scheme;
  for (const ClientParams& c : sorted) out.client_ids.push_back(c.client_id);
  out.pca = PcaWeights(sorted, p, r, lambda, sigma2, scheme);
  out.cov = scheme == WeightScheme::kEqual
                ? out.pca
                : CovWeights(sorted, p, r, lambda, sigma2);
  return out;
}

Eigen::MatrixXd AggregateBases(std::span<const Eigen::MatrixXd> bases,
                               std::span<const double> weights) {
  CheckWeights(bases.size(), weights);
  const Eigen::Index p = bases.front().rows();
  const Eigen::Index r = bases.front().cols();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t j = 0; j < bases.size(); ++j) {
    if (bases[j].rows() != p || bases[j].cols() != r) {
      throw DimensionError("aggregate_projectors: client " +
                           std::to_string(j) + " has shape " +
                           std::to_string(bases[j].rows()) + "x" +
                           std::to_string(bases[j].cols()));
    }
    sum.noalias() += weights[j] * (bases[j] * bases[j].transpose());
  }
  return TopSubspace(sum, static_cast<int>(r));
}

Eigen::MatrixXd AggregateProjectors(std::span<const ProjectorMessage> messages,
                                    const AggregationWeights& weights) {
  std::vector<const ProjectorMessage*> order;
  order.reserve(messages.size());
  for (const ProjectorMessage& m : messages) order.push_back(&m);
  std::stable_sort(order.begin(), order.end(),
                   [](const ProjectorMessage* a, const ProjectorMessage* b) {
                     return a->client_id < b->client_id;
                   });
  std::vector<Eigen::MatrixXd> bases;
  std::vector<double> w;
  for (const ProjectorMessage* m : order) {
    bases.push_back(m->u_hat);
    w.push_back(weights.pca_weight(m->client_id));
  }
  return AggregateBases(bases, w);
}

Eigen::MatrixXd AggregateReference(std::span<const Eigen::MatrixXd> noisy,
                                   std::span<const double> weights, int r) {
  CheckWeights(noisy.size(), weights);
  const Eigen::Index p = noisy.front().rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t j = 0; j < noisy.size(); ++j) {
    if (noisy[j].rows() != p || noisy[j].cols() != p) {
      throw DimensionError("aggregate_reference: inconsistent dimensions");
    }
    sum.noalias() += weights[j] * noisy[j];
  }
  return TopSubspace(sum, r);
}

Eigen::MatrixXd AssembleCovariance(const Eigen::MatrixXd& u_hat,
                                   std::span<const Eigen::MatrixXd> blocks,
                                   std::span<const double> v, double sigma2,
                                   bool psd_clip) {
  CheckWeights(blocks.size(), v);
  const Eigen::Index r = u_hat.cols();
  Eigen::MatrixXd spike = Eigen::MatrixXd::Zero(r, r);
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const Eigen::MatrixXd& b = blocks[j];
    if (b.rows() != r || b.cols() != r) {
      throw DimensionError("assemble_covariance: eigenvalue block " +
                           std::to_string(j) + " is not " +
                           std::to_string(r) + "x" + std::to_string(r));
    }
    const double asym = (b - b.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8) {
      std::clog << "fedspike: eigenvalue block " << j
                << " asymmetric by " << asym << "; symmetrizing\n";
    }
    spike += v[j] * (0.5 * (b + b.transpose()));
  }
  if (psd_clip) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spike);
    spike = eig.eigenvectors() *
            eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
            eig.eigenvectors().transpose();
  }
  Eigen::MatrixXd sigma = u_hat * spike * u_hat.transpose();
  sigma = 0.5 * (sigma + sigma.transpose());
  sigma.diagonal().array() += sigma2;
  return sigma;
}

Eigen::MatrixXd AssembleCovariance(const Eigen::MatrixXd& u_hat,
                                   std::span<const EigenvalueMessage> messages,
                                   const AggregationWeights& weights,
                                   double sigma2, bool psd_clip) {
  std::vector<const EigenvalueMessage*> order;
  for (const EigenvalueMessage& m : messages) order.push_back(&m);
  std::stable_sort(order.begin(), order.end(),
                   [](const EigenvalueMessage* a, const EigenvalueMessage* b) {
                     return a->client_id < b->client_id;
                   });
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<double> v;
  for (const EigenvalueMessage* m : order) {
    blocks.push_back(m->lambda_hat);
    v.push_back(weights.cov_weight(m->client_id));
  }
  return AssembleCovariance(u_hat, blocks, v, sigma2, psd_clip);
}

}  // namespace fedspike
