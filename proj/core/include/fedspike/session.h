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

#ifndef FEDSPIKE_SESSION_H_
#define FEDSPIKE_SESSION_H_

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedspike/client.h"
#include "fedspike/protocol.h"
#include "fedspike/server.h"
#include "fedspike/spiked_model.h"
#include "fedspike/transport.h"

namespace fedspike {

// A participating client: its local data and configuration. Subclasses may
// override the round handlers, e.g. to model a client that never answers
// (return std::nullopt).
class ClientHandle {
 public:
  ClientHandle(Dataset data, ClientConfig config);
  virtual ~ClientHandle() = default;

  const std::string& id() const { return config_.client_id; }
  const ClientConfig& config() const { return config_; }
  const Dataset& data() const { return data_; }

  virtual std::optional<ProjectorMessage> ProjectorRound();
  virtual std::optional<EigenvalueMessage> EigenvalueRound(
      const BroadcastMessage& broadcast);

 private:
  const LocalSpectrum& spectrum();

  Dataset data_;
  ClientConfig config_;
  std::optional<LocalSpectrum> spectrum_;
};

struct ServerConfig {
  int rank = 1;
  double lambda = 1.0;  // plug-in used for weights
  double sigma2 = 1.0;  // noise level removed in covariance assembly
  WeightScheme scheme = WeightScheme::kOptimal;
  // Extension: aggregate over the clients that responded, renormalizing the
  // weights, instead of failing the session.
  bool allow_dropout = false;
  bool psd_clip = false;
  std::chrono::milliseconds round_timeout{30000};
};

// Stateless server handle: weight computation and the two aggregation steps.
class CentralServer {
 public:
  explicit CentralServer(ServerConfig config);
  const ServerConfig& config() const { return config_; }

  AggregationWeights Weights(std::span<const ProjectorMessage> round1) const;
  BroadcastMessage AggregateRound1(std::span<const ProjectorMessage> round1,
                                   const AggregationWeights& weights) const;
  Eigen::MatrixXd AssembleRound2(const Eigen::MatrixXd& u_hat,
                                 std::span<const EigenvalueMessage> round2,
                                 const AggregationWeights& weights) const;

 private:
  ServerConfig config_;
};

struct TranscriptEntry {
  int round = 0;
  std::string sender;  // client id, or "server" for the broadcast
  std::string type;
  std::string payload;
};

struct SessionResult {
  Eigen::MatrixXd u_hat;
  Eigen::MatrixXd sigma_hat;
  AggregationWeights round1_weights;
  AggregationWeights round2_weights;
  std::vector<TranscriptEntry> transcript;  // in order received
  std::vector<std::string> dropped;         // only with allow_dropout
};

// Runs both protocol rounds: projectors up, aggregated subspace down,
// eigenvalue blocks up, covariance assembly. Each client runs on its own
// worker thread. Throws SessionError on duplicate ids, inconsistent shapes or
// (without allow_dropout) missing responses, listing the missing client ids.
SessionResult RunFederatedSession(std::span<ClientHandle* const> clients,
                                  const CentralServer& server,
                                  Transport& transport);

}  // namespace fedspike

#endif  // FEDSPIKE_SESSION_H_
