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

#ifndef FEDSPIKE_RATES_H_
#define FEDSPIKE_RATES_H_

#include <span>

namespace fedspike {

// Per-client arguments of the rate functions.
struct RateInputs {
  int n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  int p = 0;
  int r = 0;
  double lambda = 0.0;
  double sigma2 = 0.0;
};

// Which family of per-client rates a bound is built from.
enum class RateVariant {
  kLogFactors,  // Psi0~, Psi1~ (with log n and log(2.5/delta)); used for weights
  kMinimax,     // Psi0, Psi1 (minimax rates without log factors)
};

void ValidateRateInputs(const RateInputs& in);

// Projector error rate with log factors:
//   (s/l + sqrt(s/l)) (sqrt(rp/n) + p sqrt(r(r + log n)) / (n eps) * sqrt(log(2.5/delta)))
double Psi0Tilde(const RateInputs& in);

// Eigenvalue error rate with log factors:
//   sqrt(r(r + log n)/n) + sqrt(r (r + log n)^3) / (n eps) * sqrt(log(2.5/delta))
double Psi1Tilde(const RateInputs& in);

// Minimax rates without log factors:
//   Psi0^2 = (s^2/l^2 + s/l)(pr/n + p^2 r^2/(n^2 eps^2)),
//   Psi1^2 = r^2/n + r^4/(n^2 eps^2).
double Psi0(const RateInputs& in);
double Psi1(const RateInputs& in);

// min(1 / sum_j Psi0_j^{-2}, 2r).
double PcaBound(std::span<const RateInputs> clients,
                RateVariant variant = RateVariant::kLogFactors);

// min(lambda^2 / sum_j Psi0_j^{-2} + lambda^2 / sum_j Psi1_j^{-2}, 2 r lambda^2).
double CovBound(std::span<const RateInputs> clients, double lambda,
                RateVariant variant = RateVariant::kLogFactors);

// Psi0~ < c1 sqrt(r), reported as a diagnostic only.
bool SnrAdmissible(const RateInputs& in, double c1 = 0.5);

}  // namespace fedspike

#endif  // FEDSPIKE_RATES_H_
