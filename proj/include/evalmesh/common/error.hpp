/*
 * Copyright 2026 The evalmesh Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evalmesh {

enum class ErrorCode {
  kInvalidArgument,
  kSyntaxError,
  kSchemaError,
  kNoContainerForArch,
  kUnsupportedFormat,
  kCorruptImage,
  kInvalidPercentage,
  kInvalidDims,
  kChannelMismatch,
  kRankError,
  kStepError,
  kEmptyOutput,
  kNoPredictorForFramework,
  kBadWeights,
  kDeviceUnavailable,
  kClosedHandle,
  kShapeMismatch,
  kUnknownAgent,
  kDuplicateKey,
  kFetchError,
  kChecksumMismatch,
  kProtocolError,
  kBindFailure,
  kConnectionError,
  kNoAgentSatisfiesConstraints,
  kUnknownEvaluation,
  kNoSuccessfulResults,
  kUnknownSpan,
  kEndBeforeStart,
  kIncompleteTrace,
  kNoPredictor,
  kPipelineError,
  kPredictError,
  kNotFound,
  kInternal,
};

std::string_view to_string(ErrorCode code);
// Inverse of to_string; unknown names map to kInternal.
ErrorCode error_code_from_string(std::string_view name);

// Every failure in the project surfaces as an Error carrying a stable code.
// `field` is a dotted path into the offending document when one applies
// (manifest parsing, request decoding).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace evalmesh
