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

#include "fedspike/spectral.h"

#include <cmath>
#include <limits>
#include <string>

#include "fedspike/error.h"

namespace fedspike {
namespace {

void CheckSquare(const Eigen::MatrixXd& m, const char* op) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionError(std::string(op) + ": expected a non-empty square "
                         "matrix, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(op) + ": matrix has non-finite entries");
  }
}

Eigen::MatrixXd Symmetrized(const Eigen::MatrixXd& m, const char* op) {
  CheckSquare(m, op);
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale) {
    throw InvalidArgument(std::string(op) + ": matrix is not symmetric "
                          "(max asymmetry " + std::to_string(asym) + ")");
  }
  return 0.5 * (m + m.transpose());
}

void FixSign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best) {
      best = std::abs(v(i));
      arg = i;
    }
  }
  if (v(arg) < 0.0) v = -v;
}

}  // namespace

EigenDecomposition SymEig(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd sym = Symmetrized(m, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sym_eig: eigensolver did not converge");
  }
  const Eigen::Index p = sym.rows();
  EigenDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < p; ++k) FixSign(out.vectors.col(k));
  return out;
}

Eigen::MatrixXd TopSubspace(const Eigen::MatrixXd& m, int r) {
  CheckSquare(m, "svd_r");
  if (r < 1 || r > m.rows()) {
    throw DimensionError("svd_r: rank " + std::to_string(r) +
                         " outside [1, " + std::to_string(m.rows()) + "]");
  }
  EigenDecomposition eig = SymEig(m);
  return eig.vectors.leftCols(r);
}

double Eigengap(const Eigen::VectorXd& descending_values, int r) {
  if (r >= descending_values.size()) {
    return std::numeric_limits<double>::infinity();
  }
  return descending_values(r - 1) - descending_values(r);
}

Eigen::MatrixXd SampleCovariance(const Dataset& data) {
  const Eigen::MatrixXd& x = data.samples();
  const Eigen::Index p = x.rows();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / data.size());
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  return cov;
}

double ExplainedVariance(const Eigen::MatrixXd& u, const Dataset& data) {
  if (u.rows() != data.dim()) {
    throw DimensionError("explained_variance: basis has " +
                         std::to_string(u.rows()) + " rows, data has p=" +
                         std::to_string(data.dim()));
  }
  Eigen::MatrixXd cov = SampleCovariance(data.Centered());
  const double total = cov.trace();
  if (!(total > 0.0)) {
    throw InvalidArgument("explained_variance: data has zero total variance");
  }
  return (u.transpose() * cov * u).trace() / total;
}

}  // namespace fedspike
