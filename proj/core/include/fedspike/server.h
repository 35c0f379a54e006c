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

#ifndef FEDSPIKE_SERVER_H_
#define FEDSPIKE_SERVER_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fedspike/dp_mechanism.h"
#include "fedspike/protocol.h"

namespace fedspike {

enum class WeightScheme {
  kOptimal,                  // w_k proportional to Psi0~^{-2}
  kDataIndependent,          // w_k proportional to u_k^{-2}, u_k the bracketed rate
  kDataIndependentAsPrinted, // w_k proportional to u_k itself (literal variant)
  kEqual,                    // w_k = 1/m
};

std::string_view WeightSchemeName(WeightScheme scheme);
WeightScheme ParseWeightScheme(std::string_view name);

struct ClientParams {
  std::string client_id;
  int n = 0;
  PrivacyBudget budget{1.0, 0.1};
  // Per-client plug-ins; when unset the shared lambda and sigma2 apply.
  std::optional<double> lambda = std::nullopt;
  std::optional<double> sigma2 = std::nullopt;
};

// Simplex weights keyed by client id; entries are in ascending client_id
// order.
struct AggregationWeights {
  std::vector<std::string> client_ids;
  std::vector<double> pca;  // w
  std::vector<double> cov;  // v
  WeightScheme scheme = WeightScheme::kOptimal;

  double pca_weight(std::string_view id) const;
  double cov_weight(std::string_view id) const;
};

// PCA weights in the order of `clients`.
std::vector<double> PcaWeights(std::span<const ClientParams> clients, int p,
                               int r, double lambda, double sigma2,
                               WeightScheme scheme);

// v_j proportional to ((l^2 + s^2)/n_j + (8/eps_j^2) log(2.5/delta_j)
// (l^2 (r + log n_j)^2 + s^2 p^2)/n_j^2)^{-1}, in the order of `clients`.
std::vector<double> CovWeights(std::span<const ClientParams> clients, int p,
                               int r, double lambda, double sigma2);

// Both weight vectors, sorted by client id. Under kEqual the covariance
// weights are equal as well.
AggregationWeights ComputeWeights(std::span<const ClientParams> clients, int p,
                                  int r, double lambda, double sigma2,
                                  WeightScheme scheme);

// svd_r(sum_j w_j U_j U_j^T) with the sum taken in the given order.
Eigen::MatrixXd AggregateBases(std::span<const Eigen::MatrixXd> bases,
                               std::span<const double> weights);

// Pairs messages with weights by client id and sums in ascending id order,
// so the result does not depend on message arrival order.
Eigen::MatrixXd AggregateProjectors(std::span<const ProjectorMessage> messages,
                                    const AggregationWeights& weights);

// svd_r of the weighted sum of the raw noisy projectors U~U~^T + Z_j.
Eigen::MatrixXd AggregateReference(std::span<const Eigen::MatrixXd> noisy,
                                   std::span<const double> weights, int r);

// sum_j v_j U Lambda_j U^T + sigma2 I. Each Lambda_j is symmetrized first.
// With `psd_clip` negative eigenvalues of the spike part are set to zero.
Eigen::MatrixXd AssembleCovariance(const Eigen::MatrixXd& u_hat,
                                   std::span<const EigenvalueMessage> messages,
                                   const AggregationWeights& weights,
                                   double sigma2, bool psd_clip = false);

// Same formula with positional weights (messages[k] pairs with v[k]).
Eigen::MatrixXd AssembleCovariance(const Eigen::MatrixXd& u_hat,
                                   std::span<const Eigen::MatrixXd> blocks,
                                   std::span<const double> v, double sigma2,
                                   bool psd_clip = false);

}  // namespace fedspike

#endif  // FEDSPIKE_SERVER_H_
