/*
 * Copyright 2026 The TabFlow Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tabflow {

/// Broad failure classes. The CLI maps each to a process exit code.
enum class ErrorKind {
  kUsage,    // bad flags, config, or spec files (exit 2)
  kData,     // malformed or inconsistent input data (exit 3)
  kBackend,  // reasoner transport or response failures (exit 4)
  kNumeric,  // non-finite losses or states during training/sampling (exit 5)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::kUsage, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorKind::kData, message) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& message)
      : Error(ErrorKind::kBackend, message) {}
};

/// HTTP 401/403 from the LLM endpoint.
class AuthError : public BackendError {
 public:
  explicit AuthError(const std::string& message) : BackendError(message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorKind::kNumeric, message) {}
};

/// Formula syntax error; offset is the byte position in the source text.
class ParseError : public UsageError {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : UsageError(message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class DivisionByZero : public DataError {
 public:
  explicit DivisionByZero(const std::string& message) : DataError(message) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 2;
    case ErrorKind::kData:
      return 3;
    case ErrorKind::kBackend:
      return 4;
    case ErrorKind::kNumeric:
      return 5;
  }
  return 1;
}

}  // namespace tabflow
