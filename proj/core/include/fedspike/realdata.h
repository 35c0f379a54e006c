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

#ifndef FEDSPIKE_REALDATA_H_
#define FEDSPIKE_REALDATA_H_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fedspike/baselines.h"
#include "fedspike/experiments.h"
#include "fedspike/server.h"
#include "fedspike/spiked_model.h"

namespace fedspike {

struct RealdataSpec {
  std::vector<int> client_sizes{130, 51};
  int rank = 5;
  double epsilon = 0.4;
  double delta = 0.1;
  int top_k = 3;
  std::pair<int, int> tail{51, 251};
  bool subtract_noise = true;
  // Estimate one pair of plug-ins from the pooled matrix instead of one pair
  // per client.
  bool pooled_plugins = false;
  WeightScheme main_scheme = WeightScheme::kOptimal;
  bool allow_dropout = false;
  Seed seed = 20240917;
  std::vector<Method> methods{Method::kFedSpike, Method::kEqual,
                              Method::kReference, Method::kOja};
  OjaConfig oja;
};

struct RealdataMethodResult {
  std::string method;
  double explained_variance = 0.0;
};

struct RealdataReport {
  std::vector<PluginEstimate> client_plugins;  // as used by each client
  PluginEstimate server_plugins;  // sample-size weighted mean of the above
  std::vector<int> permutation;  // shuffled sample indices, client order
  std::vector<RealdataMethodResult> methods;
  // Unprivatized pooled PCA on the same data; an upper reference.
  double pooled_explained_variance = 0.0;

  double explained_variance(std::string_view method) const;
};

// Centers the variables over all samples, shuffles the columns with
// `spec.seed` and hands consecutive blocks of `client_sizes` to the clients,
// which then run every requested method on (1/n_j) X_j X_j^T. Each client
// estimates its own plug-ins from that matrix unless `pooled_plugins` is
// set. Explained variance is measured on the pooled data.
RealdataReport RunRealdata(const Dataset& data, const RealdataSpec& spec);

// Rank-r spiked stand-in with strong, well separated spikes. Used where the
// real matrix is unavailable.
Dataset SyntheticStandIn(int p, int n, int r, Seed seed);

}  // namespace fedspike

#endif  // FEDSPIKE_REALDATA_H_
