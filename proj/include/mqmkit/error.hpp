// Copyright 2026 The mqmkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace mqmkit {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, records, arguments).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid run or backend configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class MissingRatings : public DataError {
 public:
  using DataError::DataError;
};

class MissingSegments : public DataError {
 public:
  using DataError::DataError;
};

// A file violates its documented schema. `line()` is 1-based; 0 means the
// error is not attributable to one line (e.g. an empty file).
class SchemaError : public DataError {
 public:
  SchemaError(std::string path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class DuplicateRecord : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class OffsetError : public DataError {
 public:
  using DataError::DataError;
};

class LengthMismatch : public DataError {
 public:
  using DataError::DataError;
};

class MissingReference : public DataError {
 public:
  using DataError::DataError;
};

class LanguageMismatch : public DataError {
 public:
  using DataError::DataError;
};

// Meta-evaluation statistics that are undefined on the given data.
class TooFewSystems : public DataError {
 public:
  using DataError::DataError;
};

class TooFewPairs : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateVariance : public DataError {
 public:
  using DataError::DataError;
};

class TooFewDistinct : public DataError {
 public:
  using DataError::DataError;
};

class PoolTooSmall : public DataError {
 public:
  using DataError::DataError;
};

class RejectionExhausted : public Error {
 public:
  using Error::Error;
};

// Completion backend failures. `retryable()` drives the retry policy.
class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what, bool retryable = false)
      : Error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class TransportError : public BackendError {
 public:
  explicit TransportError(const std::string& what)
      : BackendError(what, /*retryable=*/true) {}
};

class RateLimited : public BackendError {
 public:
  explicit RateLimited(const std::string& what)
      : BackendError(what, /*retryable=*/true) {}
};

class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};

class MalformedResponse : public BackendError {
 public:
  using BackendError::BackendError;
};

// The replay log holds no completion for a prompt.
class ReplayMiss : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace mqmkit
