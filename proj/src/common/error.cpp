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

#include "evalmesh/common/error.hpp"

#include <array>
#include <utility>

namespace evalmesh {

namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 35> kNames{{
    {ErrorCode::kInvalidArgument, "InvalidArgument"},
    {ErrorCode::kSyntaxError, "SyntaxError"},
    {ErrorCode::kSchemaError, "SchemaError"},
    {ErrorCode::kNoContainerForArch, "NoContainerForArch"},
    {ErrorCode::kUnsupportedFormat, "UnsupportedFormat"},
    {ErrorCode::kCorruptImage, "CorruptImage"},
    {ErrorCode::kInvalidPercentage, "InvalidPercentage"},
    {ErrorCode::kInvalidDims, "InvalidDims"},
    {ErrorCode::kChannelMismatch, "ChannelMismatch"},
    {ErrorCode::kRankError, "RankError"},
    {ErrorCode::kStepError, "StepError"},
    {ErrorCode::kEmptyOutput, "EmptyOutput"},
    {ErrorCode::kNoPredictorForFramework, "NoPredictorForFramework"},
    {ErrorCode::kBadWeights, "BadWeights"},
    {ErrorCode::kDeviceUnavailable, "DeviceUnavailable"},
    {ErrorCode::kClosedHandle, "ClosedHandle"},
    {ErrorCode::kShapeMismatch, "ShapeMismatch"},
    {ErrorCode::kUnknownAgent, "UnknownAgent"},
    {ErrorCode::kDuplicateKey, "DuplicateKey"},
    {ErrorCode::kFetchError, "FetchError"},
    {ErrorCode::kChecksumMismatch, "ChecksumMismatch"},
    {ErrorCode::kProtocolError, "ProtocolError"},
    {ErrorCode::kBindFailure, "BindFailure"},
    {ErrorCode::kConnectionError, "ConnectionError"},
    {ErrorCode::kNoAgentSatisfiesConstraints, "NoAgentSatisfiesConstraints"},
    {ErrorCode::kUnknownEvaluation, "UnknownEvaluation"},
    {ErrorCode::kNoSuccessfulResults, "NoSuccessfulResults"},
    {ErrorCode::kUnknownSpan, "UnknownSpan"},
    {ErrorCode::kEndBeforeStart, "EndBeforeStart"},
    {ErrorCode::kIncompleteTrace, "IncompleteTrace"},
    {ErrorCode::kNoPredictor, "NoPredictor"},
    {ErrorCode::kPipelineError, "PipelineError"},
    {ErrorCode::kPredictError, "PredictError"},
    {ErrorCode::kNotFound, "NotFound"},
    {ErrorCode::kInternal, "Internal"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Internal";
}

ErrorCode error_code_from_string(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return ErrorCode::kInternal;
}

}  // namespace evalmesh
