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

#include "coqharness/common/error.hpp"

namespace coqharness {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnterminatedComment: return "UnterminatedComment";
    case ErrorCode::kUnterminatedString: return "UnterminatedString";
    case ErrorCode::kSpawnFailure: return "SpawnFailure";
    case ErrorCode::kPreludeError: return "PreludeError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kSessionDead: return "SessionDead";
    case ErrorCode::kQueryRejected: return "QueryRejected";
    case ErrorCode::kMalformedState: return "MalformedState";
    case ErrorCode::kNoSourcesFound: return "NoSourcesFound";
    case ErrorCode::kTooFewRecords: return "TooFewRecords";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kEmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kUnknownStrategy: return "UnknownStrategy";
    case ErrorCode::kTemplateError: return "TemplateError";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kCacheMiss: return "CacheMiss";
    case ErrorCode::kScriptParseError: return "ScriptParseError";
    case ErrorCode::kTooFewConfigs: return "TooFewConfigs";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace coqharness
