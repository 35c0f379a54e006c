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

#ifndef FEDSPIKE_SPECTRAL_H_
#define FEDSPIKE_SPECTRAL_H_

#include <Eigen/Dense>

#include "fedspike/spiked_model.h"

namespace fedspike {

struct EigenDecomposition {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column k pairs with values(k)
};

// Full decomposition of a symmetric matrix. The input is symmetrized as
// (M + M^T)/2; asymmetry beyond 1e-8 * max|M| is rejected.
//
// Sign convention: the entry of largest magnitude in each eigenvector is
// positive (ties resolved toward the lowest index).
EigenDecomposition SymEig(const Eigen::MatrixXd& m);

// svd_r: eigenvectors of the r algebraically largest eigenvalues of the
// symmetrized input, ordered by decreasing eigenvalue. For the PSD matrices
// aggregated by the server this equals the top-r singular subspace; for the
// indefinite client matrix UU^T + Z it is the top eigen-subspace.
Eigen::MatrixXd TopSubspace(const Eigen::MatrixXd& m, int r);

// Gap lambda_r - lambda_{r+1} of a symmetric matrix (infinity when r == p).
double Eigengap(const Eigen::VectorXd& descending_values, int r);

// (1/n) X X^T, uncentered.
Eigen::MatrixXd SampleCovariance(const Dataset& data);

// trace(U^T S U) / trace(S) with S the centered sample covariance.
double ExplainedVariance(const Eigen::MatrixXd& u, const Dataset& data);

}  // namespace fedspike

#endif  // FEDSPIKE_SPECTRAL_H_
