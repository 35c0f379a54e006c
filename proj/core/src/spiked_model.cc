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

#include "fedspike/spiked_model.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fedspike/error.h"

namespace fedspike {

SpikedModel::SpikedModel(Eigen::MatrixXd basis, Eigen::VectorXd spikes,
                         double noise_var)
    : basis_(std::move(basis)), spikes_(std::move(spikes)),
      noise_var_(noise_var) {
  if (basis_.cols() < 1 || basis_.rows() < 1) {
    throw DimensionError("spiked model basis must be non-empty");
  }
  if (basis_.cols() > basis_.rows()) {
    throw DimensionError("spike rank r=" + std::to_string(basis_.cols()) +
                         " exceeds dimension p=" +
                         std::to_string(basis_.rows()));
  }
  if (spikes_.size() != basis_.cols()) {
    throw DimensionError("need one spike eigenvalue per basis column");
  }
  if (OrthonormalityDefect(basis_) > 1e-10) {
    throw InvalidArgument("spiked model basis is not orthonormal");
  }
  for (Eigen::Index k = 0; k < spikes_.size(); ++k) {
    if (!(spikes_(k) > 0.0) || !std::isfinite(spikes_(k))) {
      throw InvalidArgument("spike eigenvalues must be positive and finite");
    }
    if (k > 0 && spikes_(k) > spikes_(k - 1)) {
      throw InvalidArgument("spike eigenvalues must be non-increasing");
    }
  }
  if (!(noise_var_ > 0.0) || !std::isfinite(noise_var_)) {
    throw InvalidArgument("noise variance must be positive and finite");
  }
}

SpikedModel SpikedModel::WithRandomBasis(int p, int r, double lambda,
                                         double noise_var, Seed seed) {
  return SpikedModel(RandomOrthonormal(p, r, seed),
                     Eigen::VectorXd::Constant(r, lambda), noise_var);
}

Dataset::Dataset(Eigen::MatrixXd samples, std::string client_id)
    : samples_(std::move(samples)), client_id_(std::move(client_id)) {
  if (samples_.rows() < 1 || samples_.cols() < 1) {
    throw DimensionError("dataset needs p >= 1 and n >= 1");
  }
  if (!samples_.allFinite()) {
    throw InvalidArgument("dataset contains non-finite entries");
  }
}

Dataset Dataset::Centered() const {
  Eigen::VectorXd mean = samples_.rowwise().mean();
  return Dataset(samples_.colwise() - mean, client_id_);
}

Dataset Dataset::Slice(int begin, int count, std::string client_id) const {
  if (begin < 0 || count < 1 || begin + count > size()) {
    throw DimensionError("dataset slice out of range");
  }
  return Dataset(samples_.middleCols(begin, count), std::move(client_id));
}

Eigen::MatrixXd RandomOrthonormal(int p, int r, Seed seed) {
  if (r < 1 || p < 1) throw DimensionError("need p >= 1 and r >= 1");
  if (r > p) {
    throw DimensionError("cannot build " + std::to_string(r) +
                         " orthonormal columns in dimension " +
                         std::to_string(p));
  }
  Engine engine(seed);
  Eigen::MatrixXd g = StandardNormalMatrix(p, r, engine);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, r);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  for (int k = 0; k < r; ++k) {
    if (packed(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  return q;
}

Eigen::MatrixXd CovarianceMatrix(const SpikedModel& model) {
  const Eigen::MatrixXd& u = model.basis();
  Eigen::MatrixXd sigma = u * model.spikes().asDiagonal() * u.transpose();
  sigma.diagonal().array() += model.noise_var();
  // Exact symmetry regardless of rounding in the triple product.
  Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  return sym;
}

Dataset Sample(const SpikedModel& model, int n, Seed seed) {
  if (n < 1) throw InvalidArgument("sample size must be >= 1");
  Engine engine(seed);
  const int p = model.dim();
  const int r = model.rank();
  Eigen::MatrixXd g = StandardNormalMatrix(r, n, engine);
  Eigen::MatrixXd z = StandardNormalMatrix(p, n, engine);
  Eigen::MatrixXd loading =
      model.basis() * model.spikes().cwiseSqrt().asDiagonal();
  Eigen::MatrixXd x = loading * g;
  x.noalias() += std::sqrt(model.noise_var()) * z;
  return Dataset(std::move(x));
}

double ProjectionDistance(const Eigen::MatrixXd& u1,
                          const Eigen::MatrixXd& u2) {
  if (u1.rows() != u2.rows() || u1.cols() != u2.cols()) {
    throw DimensionError("projection_distance: shape mismatch (" +
                         std::to_string(u1.rows()) + "x" +
                         std::to_string(u1.cols()) + " vs " +
                         std::to_string(u2.rows()) + "x" +
                         std::to_string(u2.cols()) + ")");
  }
  // Equals sqrt(2r - 2 ||U1^T U2||_F^2) for orthonormal inputs, without the
  // cancellation near zero.
  const Eigen::MatrixXd residual = u2 - u1 * (u1.transpose() * u2);
  return std::sqrt(2.0) * residual.norm();
}

double OrthonormalityDefect(const Eigen::MatrixXd& u) {
  return (u.transpose() * u -
          Eigen::MatrixXd::Identity(u.cols(), u.cols()))
      .norm();
}

}  // namespace fedspike
