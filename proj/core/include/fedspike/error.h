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

#ifndef FEDSPIKE_ERROR_H_
#define FEDSPIKE_ERROR_H_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fedspike {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values (budgets, ranks, sizes, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Shape mismatches between matrices or between clients.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown, e.g. a vanishing eigengap.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid wire payload. `field()` names the offending field.
class DecodeError : public Error {
 public:
  DecodeError(std::string field, const std::string& what)
      : Error("decode error in field '" + field + "': " + what),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Federated session failure. Lists client ids that did not respond, if any.
class SessionError : public Error {
 public:
  explicit SessionError(const std::string& what,
                        std::vector<std::string> missing = {})
      : Error(what), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing_clients() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

// Transport-level I/O failure (socket, filesystem).
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedspike

#endif  // FEDSPIKE_ERROR_H_
