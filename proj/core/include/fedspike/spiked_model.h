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

#ifndef FEDSPIKE_SPIKED_MODEL_H_
#define FEDSPIKE_SPIKED_MODEL_H_

#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "fedspike/random.h"

namespace fedspike {

// Spiked covariance model  Sigma = U diag(spikes) U^T + noise_var * I_p.
//
// The basis must have orthonormal columns (||U^T U - I||_F <= 1e-10) and the
// spikes must be positive and sorted non-increasing. Immutable once built.
class SpikedModel {
 public:
  SpikedModel(Eigen::MatrixXd basis, Eigen::VectorXd spikes, double noise_var);

  // Model with a random Haar basis and all spikes equal to `lambda`.
  static SpikedModel WithRandomBasis(int p, int r, double lambda,
                                     double noise_var, Seed seed);

  int dim() const { return static_cast<int>(basis_.rows()); }
  int rank() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::VectorXd& spikes() const { return spikes_; }
  double noise_var() const { return noise_var_; }

  // Scalar signal strength used by the rate and calibration formulas: the
  // smallest spike.
  double plugin_lambda() const { return spikes_(spikes_.size() - 1); }

 private:
  Eigen::MatrixXd basis_;
  Eigen::VectorXd spikes_;
  double noise_var_;
};

// p x n sample matrix, one observation per column.
class Dataset {
 public:
  explicit Dataset(Eigen::MatrixXd samples, std::string client_id = {});

  int dim() const { return static_cast<int>(samples_.rows()); }
  int size() const { return static_cast<int>(samples_.cols()); }
  const Eigen::MatrixXd& samples() const { return samples_; }
  const std::string& client_id() const { return client_id_; }

  // Copy with every row shifted to zero mean.
  Dataset Centered() const;
  // Columns [begin, begin + count) as a new dataset.
  Dataset Slice(int begin, int count, std::string client_id = {}) const;

 private:
  Eigen::MatrixXd samples_;
  std::string client_id_;
};

// p x r matrix with orthonormal columns, Haar-distributed: Q factor of a
// Gaussian matrix with the signs of diag(R) normalized to be positive.
Eigen::MatrixXd RandomOrthonormal(int p, int r, Seed seed);

Eigen::MatrixXd CovarianceMatrix(const SpikedModel& model);

// n i.i.d. draws X = U diag(sqrt(spikes)) g + sigma z without forming Sigma.
Dataset Sample(const SpikedModel& model, int n, Seed seed);

// ||U1 U1^T - U2 U2^T||_F for orthonormal U1, U2, computed as
// sqrt(2) ||(I - U1 U1^T) U2||_F.
double ProjectionDistance(const Eigen::MatrixXd& u1, const Eigen::MatrixXd& u2);

// ||U^T U - I||_F.
double OrthonormalityDefect(const Eigen::MatrixXd& u);

// CSV with one observation per row and p columns. With `header` the first
// line is skipped.
Dataset ReadDatasetCsv(const std::filesystem::path& path, bool header = false);
void WriteDatasetCsv(const Dataset& data, const std::filesystem::path& path);

}  // namespace fedspike

#endif  // FEDSPIKE_SPIKED_MODEL_H_
