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

#include "fedspike/rates.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedspike/error.h"

namespace fedspike {

void ValidateRateInputs(const RateInputs& in) {
  if (in.n < 1 || in.p < 1 || in.r < 1) {
    throw InvalidArgument("rate inputs: n, p, r must be positive");
  }
  if (!(in.epsilon > 0.0) || !(in.lambda > 0.0) || !(in.sigma2 >= 0.0)) {
    throw InvalidArgument("rate inputs: epsilon, lambda must be positive");
  }
  if (!(in.delta > 0.0 && in.delta < 1.0)) {
    throw InvalidArgument("rate inputs: delta must lie in (0, 1)");
  }
}

double Psi0Tilde(const RateInputs& in) {
  ValidateRateInputs(in);
  const double ratio = in.sigma2 / in.lambda;
  const double n = in.n;
  const double log_term = in.r + std::log(n);
  const double sampling = std::sqrt(in.r * static_cast<double>(in.p) / n);
  const double privacy = in.p * std::sqrt(in.r * log_term) /
                         (n * in.epsilon) * std::sqrt(std::log(2.5 / in.delta));
  return (ratio + std::sqrt(ratio)) * (sampling + privacy);
}

double Psi1Tilde(const RateInputs& in) {
  ValidateRateInputs(in);
  const double n = in.n;
  const double log_term = in.r + std::log(n);
  return std::sqrt(in.r * log_term / n) +
         std::sqrt(in.r * log_term * log_term * log_term) / (n * in.epsilon) *
             std::sqrt(std::log(2.5 / in.delta));
}

double Psi0(const RateInputs& in) {
  ValidateRateInputs(in);
  const double ratio = in.sigma2 / in.lambda;
  const double n = in.n;
  const double pr = static_cast<double>(in.p) * in.r;
  return std::sqrt((ratio * ratio + ratio) *
                   (pr / n + pr * pr / (n * n * in.epsilon * in.epsilon)));
}

double Psi1(const RateInputs& in) {
  ValidateRateInputs(in);
  const double n = in.n;
  const double r2 = static_cast<double>(in.r) * in.r;
  return std::sqrt(r2 / n + r2 * r2 / (n * n * in.epsilon * in.epsilon));
}

namespace {

double InverseSquareSum(std::span<const RateInputs> clients,
                        double (*rate)(const RateInputs&)) {
  double sum = 0.0;
  for (const RateInputs& c : clients) {
    const double v = rate(c);
    sum += 1.0 / (v * v);
  }
  return sum;
}

void CheckClients(std::span<const RateInputs> clients) {
  if (clients.empty()) throw InvalidArgument("rate bound needs >= 1 client");
  for (const RateInputs& c : clients) {
    if (c.r != clients.front().r || c.p != clients.front().p) {
      throw DimensionError("rate bound: clients disagree on p or r");
    }
  }
}

}  // namespace

double PcaBound(std::span<const RateInputs> clients, RateVariant variant) {
  CheckClients(clients);
  auto* psi0 = variant == RateVariant::kLogFactors ? &Psi0Tilde : &Psi0;
  const double harmonic = 1.0 / InverseSquareSum(clients, psi0);
  return std::min(harmonic, 2.0 * clients.front().r);
}

double CovBound(std::span<const RateInputs> clients, double lambda,
                RateVariant variant) {
  CheckClients(clients);
  if (!(lambda > 0.0)) throw InvalidArgument("cov_bound: lambda must be > 0");
  const bool tilde = variant == RateVariant::kLogFactors;
  auto* psi0 = tilde ? &Psi0Tilde : &Psi0;
  auto* psi1 = tilde ? &Psi1Tilde : &Psi1;
  const double l2 = lambda * lambda;
  const double uncapped = l2 / InverseSquareSum(clients, psi0) +
                          l2 / InverseSquareSum(clients, psi1);
  return std::min(uncapped, 2.0 * clients.front().r * l2);
}

bool SnrAdmissible(const RateInputs& in, double c1) {
  return Psi0Tilde(in) < c1 * std::sqrt(static_cast<double>(in.r));
}

}  // namespace fedspike
