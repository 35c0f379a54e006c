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

#ifndef FEDSPIKE_PROTOCOL_H_
#define FEDSPIKE_PROTOCOL_H_

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace fedspike {

inline constexpr int kSchemaVersion = 1;

// Round 1, client -> server: the privatized local subspace.
struct ProjectorMessage {
  static constexpr int kRound = 1;
  std::string client_id;
  Eigen::MatrixXd u_hat;  // p x r, orthonormal
  int n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  // The client's own signal and noise plug-ins, sent only when the server
  // should weight with them instead of its shared values. Both or neither.
  std::optional<double> lambda_plugin;
  std::optional<double> sigma2_plugin;
  std::vector<std::string> warnings;
  int schema_version = kSchemaVersion;
};

// Round 2, server -> every client: the aggregated subspace.
struct BroadcastMessage {
  static constexpr int kRound = 2;
  Eigen::MatrixXd u_hat_global;  // p x r, orthonormal
  int schema_version = kSchemaVersion;
};

// Round 2, client -> server: the privatized r x r eigenvalue block.
struct EigenvalueMessage {
  static constexpr int kRound = 2;
  std::string client_id;
  Eigen::MatrixXd lambda_hat;  // r x r, symmetric
  int schema_version = kSchemaVersion;
};

using Message = std::variant<ProjectorMessage, BroadcastMessage, EigenvalueMessage>;

// Client ids travel in file names, so they are limited to [A-Za-z0-9_.-],
// at most 128 characters, and may not be "broadcast".
void ValidateClientId(std::string_view id);

// Invariant checks shared by Encode and Decode; throw DecodeError naming the
// offending field.
void Validate(const ProjectorMessage& msg);
void Validate(const BroadcastMessage& msg);
void Validate(const EigenvalueMessage& msg);

// Canonical UTF-8 JSON. Keys appear in a fixed order; doubles are written
// with 17 significant digits ("%.16e"), so Decode(Encode(m)) reproduces every
// matrix entry bit for bit. Matrices are {"rows", "cols", "data"} with
// row-major data.
std::string Encode(const Message& msg);

// Throws DecodeError for malformed JSON, unknown "type", schema version
// mismatch, shape inconsistencies and invariant violations.
Message Decode(std::string_view bytes);

// Decode and require a specific message type.
template <class T>
T DecodeAs(std::string_view bytes);

// "projector", "broadcast" or "eigenvalues".
std::string_view MessageType(const Message& msg);
int MessageRound(const Message& msg);

}  // namespace fedspike

#endif  // FEDSPIKE_PROTOCOL_H_
