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

#ifndef FEDSPIKE_CLIENT_H_
#define FEDSPIKE_CLIENT_H_

#include <string>

#include <Eigen/Dense>

#include "fedspike/dp_mechanism.h"
#include "fedspike/protocol.h"
#include "fedspike/random.h"
#include "fedspike/spiked_model.h"

namespace fedspike {

struct ClientConfig {
  std::string client_id;
  PrivacyBudget budget{1.0, 0.1};
  int rank = 1;
  double lambda_plugin = 1.0;  // signal strength fed to the calibration
  double sigma2_plugin = 1.0;  // noise level fed to the calibration
  // Attach the plug-ins to the round-1 message so the server weights this
  // client with them.
  bool share_plugins = false;
  Seed seed = 0;
};

// Labels of the independent sub-streams expanded from ClientConfig::seed.
inline constexpr const char* kDataStream = "data";
inline constexpr const char* kProjectorNoiseStream = "projector-noise";
inline constexpr const char* kEigenvalueNoiseStream = "eigenvalue-noise";

void ValidateClientConfig(const ClientConfig& cfg);

// Non-private local spectral summary: the sample covariance and its top-r
// eigenvectors.
struct LocalSpectrum {
  Eigen::MatrixXd covariance;  // (1/n) X X^T
  Eigen::MatrixXd u_tilde;     // p x r
  int n = 0;
  bool degenerate = false;     // eigengap of the covariance at r below 1e-10
};

LocalSpectrum ComputeLocalSpectrum(const Dataset& data, int r);

// U~ U~^T + Z with Z drawn from the projector-noise stream at variance
// alpha^2 from Calibrate().
Eigen::MatrixXd NoisyLocalProjector(const LocalSpectrum& spectrum,
                                    const ClientConfig& cfg);

// Part 1 of the protocol: U^_j = svd_r(U~ U~^T + Z_j).
ProjectorMessage LocalPrivateProjector(const LocalSpectrum& spectrum,
                                       const ClientConfig& cfg);
ProjectorMessage LocalPrivateProjector(const Dataset& data,
                                       const ClientConfig& cfg);

// Part 2 of the protocol: Lambda^_j = U^T (S_j - sigma2 I) U + E_j, E_j drawn
// from the eigenvalue-noise stream at variance beta^2. The block is released
// as-is (it need not be PSD).
EigenvalueMessage LocalPrivateEigenvalues(const Eigen::MatrixXd& covariance,
                                          int n,
                                          const Eigen::MatrixXd& u_hat_global,
                                          const ClientConfig& cfg);
EigenvalueMessage LocalPrivateEigenvalues(const Dataset& data,
                                          const Eigen::MatrixXd& u_hat_global,
                                          const ClientConfig& cfg);

}  // namespace fedspike

#endif  // FEDSPIKE_CLIENT_H_
