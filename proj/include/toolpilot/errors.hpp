// Copyright 2026 The Toolpilot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOOLPILOT_ERRORS_HPP_
#define TOOLPILOT_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace toolpilot {

// Broad failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kConfig = 1,   // bad configuration or usage
  kData = 2,     // malformed or inconsistent input data
  kRuntime = 3,  // backend / tool / environment failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define TOOLPILOT_DEFINE_ERROR(Name, Kind)                 \
  class Name : public Error {                              \
   public:                                                 \
    explicit Name(const std::string& what)                 \
        : Error(ErrorKind::Kind, #Name ": " + what) {}     \
  }

// Encoder / training.
TOOLPILOT_DEFINE_ERROR(EmptyText, kData);
TOOLPILOT_DEFINE_ERROR(DegenerateEmbedding, kData);
TOOLPILOT_DEFINE_ERROR(ConfigError, kConfig);
TOOLPILOT_DEFINE_ERROR(DanglingApiId, kData);
TOOLPILOT_DEFINE_ERROR(FormatError, kData);
TOOLPILOT_DEFINE_ERROR(IoError, kData);

// Retrieval.
TOOLPILOT_DEFINE_ERROR(DuplicateApiId, kData);
TOOLPILOT_DEFINE_ERROR(StaleIndex, kData);
TOOLPILOT_DEFINE_ERROR(UnknownGoldId, kData);

// Demo selection.
TOOLPILOT_DEFINE_ERROR(EmptyDemoPools, kData);
TOOLPILOT_DEFINE_ERROR(UnknownDemoId, kData);

// Agent loop.
TOOLPILOT_DEFINE_ERROR(MalformedAction, kData);
TOOLPILOT_DEFINE_ERROR(UnknownApi, kData);
TOOLPILOT_DEFINE_ERROR(BackendError, kRuntime);

// Augmentation / evaluation.
TOOLPILOT_DEFINE_ERROR(PoolTooSmall, kData);
TOOLPILOT_DEFINE_ERROR(PoolOverlapsGold, kData);
TOOLPILOT_DEFINE_ERROR(CardinalityMismatch, kData);

#undef TOOLPILOT_DEFINE_ERROR

// Argument-level validation failures carry the offending parameter name.
class ParamError : public Error {
 public:
  enum class Reason { kMissing, kTypeMismatch, kUnexpected };

  ParamError(Reason reason, std::string param)
      : Error(ErrorKind::kData, Describe(reason, param)),
        reason_(reason),
        param_(std::move(param)) {}

  Reason reason() const noexcept { return reason_; }
  const std::string& param() const noexcept { return param_; }

 private:
  static std::string Describe(Reason reason, const std::string& param) {
    switch (reason) {
      case Reason::kMissing:
        return "MissingParam: " + param;
      case Reason::kTypeMismatch:
        return "TypeMismatch: " + param;
      case Reason::kUnexpected:
        return "UnexpectedParam: " + param;
    }
    return param;
  }

  Reason reason_;
  std::string param_;
};

// JSON-lines loader failures. Line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(ErrorKind::kData,
              "ParseError at line " + std::to_string(line) + ": " + reason),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string field, const std::string& reason)
      : Error(ErrorKind::kData, "SchemaError at line " + std::to_string(line) +
                                    ", field '" + field + "': " + reason),
        line_(line),
        field_(std::move(field)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace toolpilot

#endif  // TOOLPILOT_ERRORS_HPP_
