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

#include "fedspike/client.h"

#include <string>

#include "fedspike/error.h"
#include "fedspike/spectral.h"

namespace fedspike {

void ValidateClientConfig(const ClientConfig& cfg) {
  ValidateClientId(cfg.client_id);
  if (cfg.rank < 1) throw InvalidArgument("client rank must be >= 1");
  if (!(cfg.lambda_plugin > 0.0) || !(cfg.sigma2_plugin > 0.0)) {
    throw InvalidArgument("client plug-ins lambda and sigma2 must be > 0");
  }
}

LocalSpectrum ComputeLocalSpectrum(const Dataset& data, int r) {
  if (r < 1 || r > data.dim()) {
    throw DimensionError("client rank " + std::to_string(r) +
                         " outside [1, p=" + std::to_string(data.dim()) + "]");
  }
  if (data.size() < r) {
    throw InvalidArgument("client needs n >= r samples");
  }
  LocalSpectrum out;
  out.n = data.size();
  out.covariance = SampleCovariance(data);
  EigenDecomposition eig = SymEig(out.covariance);
  out.u_tilde = eig.vectors.leftCols(r);
  out.degenerate = Eigengap(eig.values, r) < 1e-10;
  return out;
}

Eigen::MatrixXd NoisyLocalProjector(const LocalSpectrum& spectrum,
                                    const ClientConfig& cfg) {
  ValidateClientConfig(cfg);
  const int p = static_cast<int>(spectrum.u_tilde.rows());
  const NoiseCalibration cal =
      Calibrate(cfg.budget, p, cfg.rank, spectrum.n, cfg.lambda_plugin,
                cfg.sigma2_plugin);
  Eigen::MatrixXd noisy = spectrum.u_tilde * spectrum.u_tilde.transpose();
  noisy += SampleSymmetricNoise(
      p, cal.alpha_sq, DeriveSeed(cfg.seed, kProjectorNoiseStream));
  return noisy;
}

ProjectorMessage LocalPrivateProjector(const LocalSpectrum& spectrum,
                                       const ClientConfig& cfg) {
  if (spectrum.u_tilde.cols() != cfg.rank) {
    throw DimensionError("local spectrum rank does not match client config");
  }
  ProjectorMessage msg;
  msg.client_id = cfg.client_id;
  msg.u_hat = TopSubspace(NoisyLocalProjector(spectrum, cfg), cfg.rank);
  msg.n = spectrum.n;
  msg.epsilon = cfg.budget.epsilon();
  msg.delta = cfg.budget.delta();
  if (cfg.share_plugins) {
    msg.lambda_plugin = cfg.lambda_plugin;
    msg.sigma2_plugin = cfg.sigma2_plugin;
  }
  if (spectrum.degenerate) {
    msg.warnings.push_back("degenerate-sample-covariance");
  }
  return msg;
}

ProjectorMessage LocalPrivateProjector(const Dataset& data,
                                       const ClientConfig& cfg) {
  return LocalPrivateProjector(ComputeLocalSpectrum(data, cfg.rank), cfg);
}

EigenvalueMessage LocalPrivateEigenvalues(const Eigen::MatrixXd& covariance,
                                          int n,
                                          const Eigen::MatrixXd& u_hat_global,
                                          const ClientConfig& cfg) {
  ValidateClientConfig(cfg);
  const Eigen::Index p = covariance.rows();
  if (covariance.cols() != p || u_hat_global.rows() != p ||
      u_hat_global.cols() != cfg.rank) {
    throw DimensionError("local_private_eigenvalues: inconsistent shapes");
  }
  const NoiseCalibration cal =
      Calibrate(cfg.budget, static_cast<int>(p), cfg.rank, n,
                cfg.lambda_plugin, cfg.sigma2_plugin);
  Eigen::MatrixXd shifted = covariance;
  shifted.diagonal().array() -= cfg.sigma2_plugin;
  Eigen::MatrixXd block = u_hat_global.transpose() * shifted * u_hat_global;
  block = 0.5 * (block + block.transpose());
  block += SampleSymmetricNoise(cfg.rank, cal.beta_sq,
                                DeriveSeed(cfg.seed, kEigenvalueNoiseStream));
  EigenvalueMessage msg;
  msg.client_id = cfg.client_id;
  msg.lambda_hat = std::move(block);
  return msg;
}

EigenvalueMessage LocalPrivateEigenvalues(const Dataset& data,
                                          const Eigen::MatrixXd& u_hat_global,
                                          const ClientConfig& cfg) {
  return LocalPrivateEigenvalues(SampleCovariance(data), data.size(),
                                 u_hat_global, cfg);
}

}  // namespace fedspike
