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

#ifndef FEDSPIKE_BASELINES_H_
#define FEDSPIKE_BASELINES_H_

#include <optional>
#include <span>

#include <Eigen/Dense>

#include "fedspike/dp_mechanism.h"
#include "fedspike/protocol.h"
#include "fedspike/random.h"
#include "fedspike/spiked_model.h"

namespace fedspike {

// Federated DP Oja iteration, a reconstruction of the external baseline:
//
//   V <- orth(V + eta_t (x_t x_t^T V + N_t)),   eta_t = initial_step * t^-decay
//
// run over each client's stream (x_t clipped to clip_norm), then the client
// subspaces are averaged as projectors with equal weights. N_t has i.i.d.
// N(0, noise_per_step) entries. When noise_per_step is unset it is calibrated
// from the client budget by splitting (eps, delta) evenly over the T updates
// with basic composition:
//
//   sd = 2 clip^2 * sqrt(2 log(1.25/delta) T) / eps.
struct OjaConfig {
  double initial_step = 0.05;
  double decay = 0.6;
  int rank = 1;
  std::optional<double> noise_per_step;  // variance; unset -> calibrated
  int passes = 1;
  std::optional<double> clip_norm;       // unset -> 3 sqrt(lambda + sigma2 p)
};

void ValidateOjaConfig(const OjaConfig& cfg);

// Per-update noise standard deviation for one client under the calibration
// above.
double OjaNoiseStddev(const PrivacyBudget& budget, long long updates,
                      double clip_norm);

double DefaultOjaClip(int p, double lambda, double sigma2);

// Streaming Oja on a single client; returns a p x r orthonormal basis.
Eigen::MatrixXd OjaClientSubspace(const Dataset& data, const OjaConfig& cfg,
                                  const PrivacyBudget& budget, double lambda,
                                  double sigma2, Seed seed);

// Per-client Oja followed by an equal-weight projector average.
Eigen::MatrixXd FedDpOja(std::span<const Dataset> datasets,
                         const OjaConfig& cfg,
                         std::span<const PrivacyBudget> budgets, double lambda,
                         double sigma2, Seed seed);

// Equal-weight aggregation of released subspaces (delegates to the server).
Eigen::MatrixXd EqualWeightAggregate(std::span<const ProjectorMessage> messages);

}  // namespace fedspike

#endif  // FEDSPIKE_BASELINES_H_
