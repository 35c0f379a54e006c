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

#include "fedspike/protocol.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "fedspike/error.h"
#include "fedspike/spiked_model.h"

namespace fedspike {
namespace {

using Json = nlohmann::json;

constexpr double kOrthonormalTol = 1e-8;
constexpr double kSymmetryTol = 1e-8;

void AppendDouble(std::string& out, double v, const char* field) {
  if (!std::isfinite(v)) {
    throw DecodeError(field, "non-finite value cannot be encoded");
  }
  char buf[40];
  const int len = std::snprintf(buf, sizeof(buf), "%.16e", v);
  out.append(buf, static_cast<std::size_t>(len));
}

void AppendString(std::string& out, const std::string& s) {
  out += Json(s).dump();
}

void AppendMatrix(std::string& out, const Eigen::MatrixXd& m,
                  const char* field) {
  out += "{\"rows\":" + std::to_string(m.rows()) +
         ",\"cols\":" + std::to_string(m.cols()) + ",\"data\":[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i + j > 0) out += ',';
      AppendDouble(out, m(i, j), field);
    }
  }
  out += "]}";
}

const Json& Field(const Json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw DecodeError(name, "missing");
  return *it;
}

double NumberField(const Json& obj, const char* name) {
  const Json& v = Field(obj, name);
  if (!v.is_number()) throw DecodeError(name, "expected a number");
  return v.get<double>();
}

long long IntField(const Json& obj, const char* name) {
  const Json& v = Field(obj, name);
  if (!v.is_number_integer()) throw DecodeError(name, "expected an integer");
  return v.get<long long>();
}

std::string StringField(const Json& obj, const char* name) {
  const Json& v = Field(obj, name);
  if (!v.is_string()) throw DecodeError(name, "expected a string");
  return v.get<std::string>();
}

Eigen::MatrixXd MatrixField(const Json& obj, const char* name) {
  const Json& m = Field(obj, name);
  if (!m.is_object()) throw DecodeError(name, "expected a matrix object");
  const std::string prefix(name);
  const long long rows = IntField(m, "rows");
  const long long cols = IntField(m, "cols");
  if (rows < 1 || cols < 1 || rows > 1 << 15 || cols > 1 << 15) {
    throw DecodeError(prefix + ".rows/cols", "dimensions out of range");
  }
  auto it = m.find("data");
  if (it == m.end() || !it->is_array()) {
    throw DecodeError(prefix + ".data", "missing or not an array");
  }
  if (static_cast<long long>(it->size()) != rows * cols) {
    throw DecodeError(prefix + ".data",
                      "rows*cols = " + std::to_string(rows * cols) +
                          " but data has " + std::to_string(it->size()) +
                          " entries");
  }
  Eigen::MatrixXd out(rows, cols);
  std::size_t k = 0;
  for (long long i = 0; i < rows; ++i) {
    for (long long j = 0; j < cols; ++j, ++k) {
      const Json& v = (*it)[k];
      if (!v.is_number()) {
        throw DecodeError(prefix + ".data", "entry " + std::to_string(k) +
                                                " is not a number");
      }
      out(i, j) = v.get<double>();
    }
  }
  return out;
}

void CheckRound(const Json& obj, int expected) {
  if (IntField(obj, "round") != expected) {
    throw DecodeError("round", "expected " + std::to_string(expected));
  }
}

void CheckOrthonormal(const Eigen::MatrixXd& u, const char* field) {
  if (u.cols() > u.rows()) {
    throw DecodeError(field, "more columns than rows");
  }
  const double defect = OrthonormalityDefect(u);
  if (!(defect <= kOrthonormalTol)) {
    throw DecodeError(field, "columns are not orthonormal (defect " +
                                 std::to_string(defect) + ")");
  }
}

void CheckSchema(int version) {
  if (version != kSchemaVersion) {
    throw DecodeError("schema_version",
                      "unsupported version " + std::to_string(version) +
                          ", expected " + std::to_string(kSchemaVersion));
  }
}

}  // namespace

void ValidateClientId(std::string_view id) {
  if (id.empty() || id.size() > 128) {
    throw DecodeError("client_id", "must have 1 to 128 characters");
  }
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) {
      throw DecodeError("client_id", "invalid character in '" +
                                         std::string(id) + "'");
    }
  }
  if (id == "broadcast") {
    throw DecodeError("client_id", "'broadcast' is reserved");
  }
}

void Validate(const ProjectorMessage& msg) {
  CheckSchema(msg.schema_version);
  ValidateClientId(msg.client_id);
  CheckOrthonormal(msg.u_hat, "u_hat");
  if (msg.n < 1) throw DecodeError("n", "sample size must be >= 1");
  if (!(msg.epsilon > 0.0) || !std::isfinite(msg.epsilon)) {
    throw DecodeError("epsilon", "must be positive");
  }
  if (!(msg.delta > 0.0 && msg.delta < 1.0)) {
    throw DecodeError("delta", "must lie in (0, 1)");
  }
  if (msg.lambda_plugin.has_value() != msg.sigma2_plugin.has_value()) {
    throw DecodeError("plugins", "lambda and sigma2 must come together");
  }
  if (msg.lambda_plugin && !(*msg.lambda_plugin > 0.0 &&
                             std::isfinite(*msg.lambda_plugin))) {
    throw DecodeError("plugins.lambda", "must be positive and finite");
  }
  if (msg.sigma2_plugin && !(*msg.sigma2_plugin > 0.0 &&
                             std::isfinite(*msg.sigma2_plugin))) {
    throw DecodeError("plugins.sigma2", "must be positive and finite");
  }
}

void Validate(const BroadcastMessage& msg) {
  CheckSchema(msg.schema_version);
  CheckOrthonormal(msg.u_hat_global, "u_hat_global");
}

void Validate(const EigenvalueMessage& msg) {
  CheckSchema(msg.schema_version);
  ValidateClientId(msg.client_id);
  const Eigen::MatrixXd& l = msg.lambda_hat;
  if (l.rows() != l.cols()) throw DecodeError("lambda_hat", "not square");
  if (!l.allFinite()) throw DecodeError("lambda_hat", "non-finite entries");
  const double scale = std::max(1.0, l.cwiseAbs().maxCoeff());
  if ((l - l.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw DecodeError("lambda_hat", "not symmetric");
  }
}

std::string_view MessageType(const Message& msg) {
  switch (msg.index()) {
    case 0: return "projector";
    case 1: return "broadcast";
    default: return "eigenvalues";
  }
}

int MessageRound(const Message& msg) {
  return msg.index() == 0 ? ProjectorMessage::kRound : 2;
}

std::string Encode(const Message& msg) {
  std::string out;
  out.reserve(256);
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        Validate(m);
        out += "{\"type\":";
        if constexpr (std::is_same_v<T, ProjectorMessage>) {
          out += "\"projector\",\"schema_version\":" +
                 std::to_string(m.schema_version) + ",\"client_id\":";
          AppendString(out, m.client_id);
          out += ",\"round\":1,\"n\":" + std::to_string(m.n) + ",\"epsilon\":";
          AppendDouble(out, m.epsilon, "epsilon");
          out += ",\"delta\":";
          AppendDouble(out, m.delta, "delta");
          if (m.lambda_plugin) {
            out += ",\"plugins\":{\"lambda\":";
            AppendDouble(out, *m.lambda_plugin, "plugins.lambda");
            out += ",\"sigma2\":";
            AppendDouble(out, *m.sigma2_plugin, "plugins.sigma2");
            out += "}";
          }
          out += ",\"u_hat\":";
          AppendMatrix(out, m.u_hat, "u_hat");
          out += ",\"warnings\":[";
          for (std::size_t i = 0; i < m.warnings.size(); ++i) {
            if (i > 0) out += ',';
            AppendString(out, m.warnings[i]);
          }
          out += "]";
        } else if constexpr (std::is_same_v<T, BroadcastMessage>) {
          out += "\"broadcast\",\"schema_version\":" +
                 std::to_string(m.schema_version) +
                 ",\"round\":2,\"u_hat_global\":";
          AppendMatrix(out, m.u_hat_global, "u_hat_global");
        } else {
          out += "\"eigenvalues\",\"schema_version\":" +
                 std::to_string(m.schema_version) + ",\"client_id\":";
          AppendString(out, m.client_id);
          out += ",\"round\":2,\"lambda_hat\":";
          AppendMatrix(out, m.lambda_hat, "lambda_hat");
        }
        out += "}";
      },
      msg);
  return out;
}

Message Decode(std::string_view bytes) {
  Json obj;
  try {
    obj = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw DecodeError("payload", std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DecodeError("payload", "expected a JSON object");

  const std::string type = StringField(obj, "type");
  const long long version = IntField(obj, "schema_version");
  CheckSchema(static_cast<int>(version));

  if (type == "projector") {
    CheckRound(obj, ProjectorMessage::kRound);
    ProjectorMessage m;
    m.client_id = StringField(obj, "client_id");
    const long long n = IntField(obj, "n");
    if (n < 1 || n > std::numeric_limits<int>::max()) {
      throw DecodeError("n", "out of range");
    }
    m.n = static_cast<int>(n);
    m.epsilon = NumberField(obj, "epsilon");
    m.delta = NumberField(obj, "delta");
    if (auto it = obj.find("plugins"); it != obj.end()) {
      if (!it->is_object()) throw DecodeError("plugins", "expected an object");
      m.lambda_plugin = NumberField(*it, "lambda");
      m.sigma2_plugin = NumberField(*it, "sigma2");
    }
    m.u_hat = MatrixField(obj, "u_hat");
    if (auto it = obj.find("warnings"); it != obj.end()) {
      if (!it->is_array()) throw DecodeError("warnings", "expected an array");
      for (const Json& w : *it) {
        if (!w.is_string()) throw DecodeError("warnings", "expected strings");
        m.warnings.push_back(w.get<std::string>());
      }
    }
    Validate(m);
    return m;
  }
  if (type == "broadcast") {
    CheckRound(obj, BroadcastMessage::kRound);
    BroadcastMessage m;
    m.u_hat_global = MatrixField(obj, "u_hat_global");
    Validate(m);
    return m;
  }
  if (type == "eigenvalues") {
    CheckRound(obj, EigenvalueMessage::kRound);
    EigenvalueMessage m;
    m.client_id = StringField(obj, "client_id");
    m.lambda_hat = MatrixField(obj, "lambda_hat");
    Validate(m);
    return m;
  }
  throw DecodeError("type", "unknown message type '" + type + "'");
}

template <class T>
T DecodeAs(std::string_view bytes) {
  Message msg = Decode(bytes);
  if (auto* m = std::get_if<T>(&msg)) return std::move(*m);
  throw DecodeError("type", "unexpected message type '" +
                                std::string(MessageType(msg)) + "'");
}

template ProjectorMessage DecodeAs<ProjectorMessage>(std::string_view);
template BroadcastMessage DecodeAs<BroadcastMessage>(std::string_view);
template EigenvalueMessage DecodeAs<EigenvalueMessage>(std::string_view);

}  // namespace fedspike
