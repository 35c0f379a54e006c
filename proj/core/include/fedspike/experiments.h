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

#ifndef FEDSPIKE_EXPERIMENTS_H_
#define FEDSPIKE_EXPERIMENTS_H_

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fedspike/baselines.h"
#include "fedspike/dp_mechanism.h"
#include "fedspike/random.h"
#include "fedspike/server.h"
#include "fedspike/spiked_model.h"

namespace fedspike {

enum class Scenario {
  kPrivacyUtility,  // sweep epsilon, homogeneous clients
  kVaryClients,     // sweep m, fixed n per client
  kFixedTotal,      // sweep m, n = N / m
  kHeterogeneous,   // sweep N_sample; sizes 2N / 20N, random budgets
  kRealdata,
};

enum class Method {
  kFedSpike,   // optimal weights
  kEqual,      // equal weights, same released subspaces
  kReference,  // equal-weight average of the raw noisy projectors
  kOja,        // Fed-DP-Oja reconstruction
};

std::string_view ScenarioName(Scenario s);
Scenario ParseScenario(std::string_view name);
std::string_view MethodName(Method m);
Method ParseMethod(std::string_view name);
// Comma-separated list, e.g. "fedspike,equal".
std::vector<Method> ParseMethodList(std::string_view list);

struct ExperimentSpec {
  Scenario scenario = Scenario::kPrivacyUtility;
  int p = 50;
  int r = 1;
  double lambda = 10.0;
  double sigma2 = 1.0;
  // Sweep values: epsilon (privacy_utility), m (vary_clients, fixed_total)
  // or N_sample (heterogeneous).
  std::vector<double> sweep;
  int clients = 10;                    // privacy_utility, heterogeneous
  int samples_per_client = 10000;      // privacy_utility, vary_clients
  long long total_samples = 100000;    // fixed_total
  double epsilon = 0.5;                // vary_clients, fixed_total
  double delta = 0.1;                  // all homogeneous scenarios
  std::pair<double, double> epsilon_range{0.1, 0.3};  // heterogeneous
  std::pair<double, double> delta_range{0.1, 0.2};    // heterogeneous
  int small_factor = 2;   // heterogeneous: first half gets small_factor * N
  int large_factor = 20;  // heterogeneous: second half gets large_factor * N
  int replications = 50;
  Seed base_seed = 20240917;
  std::vector<Method> methods{Method::kFedSpike, Method::kEqual,
                              Method::kReference, Method::kOja};
  WeightScheme main_scheme = WeightScheme::kOptimal;
  OjaConfig oja;
};

// Defaults reproducing the four simulation settings.
ExperimentSpec DefaultSpec(Scenario scenario);

// Throws InvalidArgument for an infeasible layout (e.g. n_j < r) before any
// run starts.
void ValidateSpec(const ExperimentSpec& spec);

ExperimentSpec SpecFromJson(std::string_view json);
std::string SpecToJson(const ExperimentSpec& spec);

struct ClientLayout {
  std::vector<std::string> ids;
  std::vector<int> sizes;
  std::vector<PrivacyBudget> budgets;
};

Seed ReplicationSeed(const ExperimentSpec& spec, std::size_t sweep_index,
                     int replication);
ClientLayout LayoutFor(const ExperimentSpec& spec, std::size_t sweep_index,
                       Seed replication_seed);

struct RunRecord {
  std::string scenario;
  std::string method;
  double sweep_value = 0.0;
  int replication = 0;
  double projection_error = 0.0;
  std::optional<double> cov_frobenius_error;
  double wall_ms = 0.0;
  Seed seed = 0;
};

inline constexpr const char* kRunCsvHeader =
    "scenario,method,sweep_value,replication,projection_error,"
    "cov_frobenius_error,wall_ms,seed";

// One replication of one sweep point: every requested method sees the same
// truth, the same client datasets and (for the three subspace-release
// methods) the same privacy noise.
std::vector<RunRecord> RunReplication(const ExperimentSpec& spec,
                                      std::size_t sweep_index,
                                      int replication);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// All replications, ordered by (sweep, replication, method). Replications
// are distributed over `threads` workers (0 = hardware concurrency).
std::vector<RunRecord> RunScenario(const ExperimentSpec& spec,
                                   unsigned threads = 0,
                                   const ProgressFn& progress = {});

void WriteRunCsv(std::span<const RunRecord> records, std::ostream& out);
std::vector<RunRecord> ReadRunCsv(std::istream& in);

// Mean of `projection_error` per (method, sweep value); x ascending.
struct SeriesSummary {
  std::string method;
  std::vector<double> x;
  std::vector<double> mean;
};
std::vector<SeriesSummary> SummarizeRuns(std::span<const RunRecord> records);

// Plug-in estimates from the sample covariance spectrum: sigma2_hat is the
// mean of the eigenvalues ranked tail.first..tail.second (1-indexed,
// inclusive) and lambda_hat the mean of the top_k eigenvalues, minus
// sigma2_hat when `subtract_noise` is set.
struct PluginEstimate {
  double lambda_hat = 0.0;
  double sigma2_hat = 0.0;
};
PluginEstimate EstimatePlugins(const Dataset& data, int top_k,
                               std::pair<int, int> tail,
                               bool subtract_noise = true);

}  // namespace fedspike

#endif  // FEDSPIKE_EXPERIMENTS_H_
