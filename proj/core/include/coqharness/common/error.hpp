// Copyright 2026 The coqharness Authors.
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coqharness {

// Every failure the library reports is a HarnessError carrying one of these
// codes. Callers that need the extra payload catch the derived types below.
enum class ErrorCode {
  kUnterminatedComment,
  kUnterminatedString,
  kSpawnFailure,
  kPreludeError,
  kTimeout,
  kSessionDead,
  kQueryRejected,
  kMalformedState,
  kNoSourcesFound,
  kTooFewRecords,
  kUnknownId,
  kSchemaViolation,
  kEmptyTrainSet,
  kDimensionMismatch,
  kNonFiniteLoss,
  kConfigMismatch,
  kUnknownStrategy,
  kTemplateError,
  kProviderError,
  kBudgetExceeded,
  kCacheMiss,
  kScriptParseError,
  kTooFewConfigs,
  kIoError,
  kConfigError,
};

std::string_view error_code_name(ErrorCode code);

class HarnessError : public std::runtime_error {
 public:
  HarnessError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Segmentation failure; offset is the byte position of the unclosed opener.
class LexicalError : public HarnessError {
 public:
  LexicalError(ErrorCode code, std::size_t offset, const std::string& message)
      : HarnessError(code, message), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class PreludeError : public HarnessError {
 public:
  PreludeError(std::size_t step_index, const std::string& prover_message)
      : HarnessError(ErrorCode::kPreludeError,
                     "prelude step " + std::to_string(step_index) +
                         " rejected: " + prover_message),
        step_index_(step_index),
        prover_message_(prover_message) {}
  std::size_t step_index() const { return step_index_; }
  const std::string& prover_message() const { return prover_message_; }

 private:
  std::size_t step_index_;
  std::string prover_message_;
};

class SchemaViolation : public HarnessError {
 public:
  SchemaViolation(std::size_t line_number, const std::string& detail)
      : HarnessError(ErrorCode::kSchemaViolation,
                     "schema violation at line " +
                         std::to_string(line_number) + ": " + detail),
        line_number_(line_number) {}
  std::size_t line_number() const { return line_number_; }

 private:
  std::size_t line_number_;
};

class NonFiniteLoss : public HarnessError {
 public:
  explicit NonFiniteLoss(int epoch)
      : HarnessError(ErrorCode::kNonFiniteLoss,
                     "triplet objective became non-finite in epoch " +
                         std::to_string(epoch)),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class ProviderError : public HarnessError {
 public:
  ProviderError(int status, const std::string& body)
      : HarnessError(ErrorCode::kProviderError,
                     "provider returned status " + std::to_string(status) +
                         ": " + body),
        status_(status),
        body_(body) {}
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

}  // namespace coqharness
