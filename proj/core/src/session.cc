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

#include "fedspike/session.h"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <utility>

#include "fedspike/error.h"

namespace fedspike {

ClientHandle::ClientHandle(Dataset data, ClientConfig config)
    : data_(std::move(data)), config_(std::move(config)) {
  ValidateClientConfig(config_);
}

const LocalSpectrum& ClientHandle::spectrum() {
  if (!spectrum_) spectrum_ = ComputeLocalSpectrum(data_, config_.rank);
  return *spectrum_;
}

std::optional<ProjectorMessage> ClientHandle::ProjectorRound() {
  return LocalPrivateProjector(spectrum(), config_);
}

std::optional<EigenvalueMessage> ClientHandle::EigenvalueRound(
    const BroadcastMessage& broadcast) {
  const LocalSpectrum& s = spectrum();
  return LocalPrivateEigenvalues(s.covariance, s.n, broadcast.u_hat_global,
                                 config_);
}

CentralServer::CentralServer(ServerConfig config) : config_(config) {
  if (config_.rank < 1) throw InvalidArgument("server rank must be >= 1");
  if (!(config_.lambda > 0.0) || !(config_.sigma2 > 0.0)) {
    throw InvalidArgument("server plug-ins must be positive");
  }
}

AggregationWeights CentralServer::Weights(
    std::span<const ProjectorMessage> round1) const {
  if (round1.empty()) throw SessionError("no projector messages to weight");
  std::vector<ClientParams> params;
  for (const ProjectorMessage& m : round1) {
    params.push_back({m.client_id, m.n, PrivacyBudget(m.epsilon, m.delta),
                      m.lambda_plugin, m.sigma2_plugin});
  }
  const int p = static_cast<int>(round1.front().u_hat.rows());
  return ComputeWeights(params, p, config_.rank, config_.lambda,
                        config_.sigma2, config_.scheme);
}

BroadcastMessage CentralServer::AggregateRound1(
    std::span<const ProjectorMessage> round1,
    const AggregationWeights& weights) const {
  BroadcastMessage out;
  out.u_hat_global = AggregateProjectors(round1, weights);
  return out;
}

Eigen::MatrixXd CentralServer::AssembleRound2(
    const Eigen::MatrixXd& u_hat, std::span<const EigenvalueMessage> round2,
    const AggregationWeights& weights) const {
  return AssembleCovariance(u_hat, round2, weights, config_.sigma2,
                            config_.psd_clip);
}

namespace {

// Decodes a round's payloads, keeping arrival order in the transcript.
template <class T>
std::map<std::string, T> CollectRound(
    const std::vector<std::string>& payloads, int round,
    const std::set<std::string>& expected,
    std::vector<TranscriptEntry>& transcript) {
  std::map<std::string, T> out;
  for (const std::string& payload : payloads) {
    T msg;
    try {
      msg = DecodeAs<T>(payload);
    } catch (const DecodeError& e) {
      throw SessionError("round " + std::to_string(round) +
                         ": invalid client message: " + e.what());
    }
    if (!expected.count(msg.client_id)) {
      throw SessionError("round " + std::to_string(round) +
                         ": message from unexpected client '" + msg.client_id +
                         "'");
    }
    if (out.count(msg.client_id)) {
      throw SessionError("round " + std::to_string(round) +
                         ": duplicate message from '" + msg.client_id + "'");
    }
    transcript.push_back({round, msg.client_id,
                          std::string(MessageType(Message(msg))), payload});
    out.emplace(msg.client_id, std::move(msg));
  }
  return out;
}

template <class T>
std::vector<std::string> Missing(const std::set<std::string>& expected,
                                 const std::map<std::string, T>& got) {
  std::vector<std::string> missing;
  for (const std::string& id : expected) {
    if (!got.count(id)) missing.push_back(id);
  }
  return missing;
}

std::string JoinIds(const std::vector<std::string>& ids) {
  std::string out;
  for (const std::string& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}

}  // namespace

SessionResult RunFederatedSession(std::span<ClientHandle* const> clients,
                                  const CentralServer& server,
                                  Transport& transport) {
  if (clients.empty()) throw SessionError("session needs at least one client");
  std::set<std::string> ids;
  for (ClientHandle* c : clients) {
    if (!ids.insert(c->id()).second) {
      throw SessionError("duplicate client id '" + c->id() + "'");
    }
    if (c->config().rank != server.config().rank) {
      throw SessionError("client '" + c->id() + "' uses rank " +
                         std::to_string(c->config().rank) +
                         ", server expects " +
                         std::to_string(server.config().rank));
    }
    if (c->data().dim() != clients.front()->data().dim()) {
      throw SessionError("client '" + c->id() +
                         "' has a different dimension p");
    }
  }

  const auto timeout = server.config().round_timeout;
  std::mutex err_mu;
  std::map<std::string, std::string> client_errors;

  std::vector<std::jthread> workers;
  // Declared after the workers so it runs first on unwind, releasing any
  // worker still waiting for the broadcast before the joins.
  struct ShutdownGuard {
    Transport& t;
    bool armed = true;
    ~ShutdownGuard() {
      if (armed) t.Shutdown();
    }
  } guard{transport};

  for (ClientHandle* c : clients) {
    workers.emplace_back([c, &transport, timeout, &err_mu, &client_errors] {
      try {
        std::unique_ptr<ClientChannel> channel = transport.Connect(c->id());
        std::optional<ProjectorMessage> m1 = c->ProjectorRound();
        if (!m1) return;
        channel->Send(ProjectorMessage::kRound, Encode(*m1));
        // The server may spend a full round timeout waiting for a silent
        // peer before it aggregates, so allow for that plus aggregation.
        // Shutdown releases this wait early if the session ends.
        std::optional<std::string> bytes =
            channel->AwaitBroadcast(2 * timeout);
        if (!bytes) return;
        BroadcastMessage b = DecodeAs<BroadcastMessage>(*bytes);
        std::optional<EigenvalueMessage> m2 = c->EigenvalueRound(b);
        if (!m2) return;
        channel->Send(EigenvalueMessage::kRound, Encode(*m2));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        client_errors[c->id()] = e.what();
      }
    });
  }

  SessionResult result;
  auto fail_missing = [&](int round, std::vector<std::string> missing) {
    std::string what = "round " + std::to_string(round) +
                       ": no response from client(s) " + JoinIds(missing);
    std::lock_guard<std::mutex> lock(err_mu);
    for (const std::string& id : missing) {
      if (auto it = client_errors.find(id); it != client_errors.end()) {
        what += "; " + id + ": " + it->second;
      }
    }
    throw SessionError(what, std::move(missing));
  };

  // Round 1: projectors.
  auto round1 = CollectRound<ProjectorMessage>(
      transport.Gather(1, ids.size(), timeout), 1, ids, result.transcript);
  std::vector<std::string> missing = Missing(ids, round1);
  if (!missing.empty()) {
    if (!server.config().allow_dropout || round1.empty()) {
      fail_missing(1, missing);
    }
    result.dropped = missing;
  }
  std::vector<ProjectorMessage> msgs1;
  std::set<std::string> responders;
  for (auto& [id, m] : round1) {
    responders.insert(id);
    msgs1.push_back(m);
  }
  for (const ProjectorMessage& m : msgs1) {
    if (m.u_hat.rows() != msgs1.front().u_hat.rows() ||
        m.u_hat.cols() != server.config().rank) {
      throw SessionError("client '" + m.client_id +
                         "' sent a subspace with inconsistent shape");
    }
  }
  result.round1_weights = server.Weights(msgs1);
  BroadcastMessage broadcast = server.AggregateRound1(msgs1,
                                                      result.round1_weights);
  const std::string broadcast_bytes = Encode(broadcast);
  result.transcript.push_back(
      {BroadcastMessage::kRound, "server", "broadcast", broadcast_bytes});
  transport.Broadcast(broadcast_bytes);
  // The server works with the decoded broadcast, exactly what clients see.
  result.u_hat = DecodeAs<BroadcastMessage>(broadcast_bytes).u_hat_global;

  // Round 2: eigenvalue blocks from the round-1 responders.
  auto round2 = CollectRound<EigenvalueMessage>(
      transport.Gather(2, responders.size(), timeout), 2, responders,
      result.transcript);
  missing = Missing(responders, round2);
  if (!missing.empty()) {
    if (!server.config().allow_dropout || round2.empty()) {
      fail_missing(2, missing);
    }
    result.dropped.insert(result.dropped.end(), missing.begin(), missing.end());
  }
  std::vector<EigenvalueMessage> msgs2;
  std::vector<ProjectorMessage> params2;
  for (auto& [id, m] : round2) {
    msgs2.push_back(m);
    params2.push_back(round1.at(id));
  }
  result.round2_weights = missing.empty() ? result.round1_weights
                                          : server.Weights(params2);
  result.sigma_hat =
      server.AssembleRound2(result.u_hat, msgs2, result.round2_weights);
  guard.armed = false;
  return result;
}

}  // namespace fedspike
