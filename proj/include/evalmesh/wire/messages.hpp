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

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evalmesh/manifest/manifest.hpp"
#include "evalmesh/pipeline/postprocess.hpp"
#include "evalmesh/pipeline/tensor.hpp"
#include "evalmesh/registry/records.hpp"
#include "evalmesh/tracer/span.hpp"

namespace evalmesh::wire {

namespace msg {
inline constexpr const char* kModelLoad = "ModelLoad";
inline constexpr const char* kPredict = "Predict";
inline constexpr const char* kModelUnload = "ModelUnload";
inline constexpr const char* kRunEvaluation = "RunEvaluation";
inline constexpr const char* kHealth = "Health";
inline constexpr const char* kRegisterAgent = "RegisterAgent";
inline constexpr const char* kHeartbeat = "Heartbeat";
inline constexpr const char* kPublishResult = "PublishResult";
inline constexpr const char* kPublishSpans = "PublishSpans";
// Registry calls hosted next to the orchestrator.
inline constexpr const char* kResolve = "Resolve";
inline constexpr const char* kListAgents = "ListAgents";
inline constexpr const char* kPutManifest = "PutManifest";
inline constexpr const char* kFindManifests = "FindManifests";
}  // namespace msg

nlohmann::json tensor_to_json(const pipeline::Tensor& t);
pipeline::Tensor tensor_from_json(const nlohmann::json& j);

nlohmann::json prediction_to_json(const pipeline::Prediction& p);
pipeline::Prediction prediction_from_json(const nlohmann::json& j);

// Either inline bytes or a URL the agent fetches through its asset cache.
struct InputBlob {
  std::vector<std::uint8_t> data;
  std::optional<std::string> url;
  std::string name;
  friend bool operator==(const InputBlob&, const InputBlob&) = default;
};

nlohmann::json input_to_json(const InputBlob& in);
InputBlob input_from_json(const nlohmann::json& j);

struct RunEvaluationRequest {
  std::string evaluation_id;
  manifest::Manifest manifest;
  std::vector<InputBlob> inputs;
  std::int64_t batch_size = 1;
  std::optional<tracer::TraceLevel> trace_level;
  std::size_t top_k = 5;
  // Reply with the finished result instead of an acknowledgement.
  bool wait = true;
  // Send the result to the orchestrator with PublishResult.
  bool publish = false;
};

nlohmann::json to_json(const RunEvaluationRequest& r);
RunEvaluationRequest run_request_from_json(const nlohmann::json& j);

enum class EvaluationStatus { kOk, kFailed };
std::string_view to_string(EvaluationStatus s);

struct ErrorInfo {
  std::string code;
  std::string message;
  friend bool operator==(const ErrorInfo&, const ErrorInfo&) = default;
};

struct EnvironmentReport {
  std::string container;
  std::vector<std::pair<std::string, std::string>> envvars;
  friend bool operator==(const EnvironmentReport&, const EnvironmentReport&) = default;
};

// One top-k list per declared output.
struct ItemPredictions {
  std::string input;
  std::vector<std::vector<pipeline::Prediction>> outputs;
  friend bool operator==(const ItemPredictions&, const ItemPredictions&) = default;
};

struct EvaluationResult {
  std::string evaluation_id;
  std::string agent_id;
  registry::HardwareDescriptor hardware;
  std::string manifest_key;
  std::string model_name;
  std::string model_version;
  registry::FrameworkVersion framework;
  std::int64_t batch_size = 1;
  EnvironmentReport environment;
  std::vector<ItemPredictions> predictions;
  // Per batch: around predict, and around pipeline + predict + top-k.
  std::vector<std::int64_t> latencies_us;
  std::vector<std::int64_t> end_to_end_us;
  std::string trace_id;
  std::vector<tracer::Span> spans;
  EvaluationStatus status = EvaluationStatus::kOk;
  std::optional<ErrorInfo> error;
  std::int64_t started_at_ms = 0;
  std::int64_t completed_at_ms = 0;
  std::size_t item_count = 0;

  bool ok() const { return status == EvaluationStatus::kOk; }
  friend bool operator==(const EvaluationResult&, const EvaluationResult&) = default;
};

nlohmann::json to_json(const EvaluationResult& r);
EvaluationResult result_from_json(const nlohmann::json& j);

}  // namespace evalmesh::wire
