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

#include "evalmesh/wire/messages.hpp"

#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"
#include "evalmesh/registry/json.hpp"
#include "evalmesh/tracer/json.hpp"

namespace evalmesh::wire {

using nlohmann::json;

namespace {

template <typename Fn>
auto guarded(const char* what, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocolError, std::string("bad ") + what + ": " + e.what());
  }
}

json span_list(const std::vector<tracer::Span>& spans) {
  json arr = json::array();
  for (const auto& s : spans) arr.push_back(tracer::span_to_json(s));
  return arr;
}

}  // namespace

json tensor_to_json(const pipeline::Tensor& t) { return base64_encode(pipeline::dump_tensor(t)); }

pipeline::Tensor tensor_from_json(const json& j) {
  if (!j.is_string()) throw Error(ErrorCode::kProtocolError, "tensor must be base64 text");
  const auto bytes = base64_decode(j.get<std::string>());
  return pipeline::load_tensor(bytes);
}

json prediction_to_json(const pipeline::Prediction& p) {
  json j = {{"index", p.index}, {"probability", p.probability}};
  if (p.label) j["label"] = *p.label;
  return j;
}

pipeline::Prediction prediction_from_json(const json& j) {
  pipeline::Prediction p;
  p.index = j.at("index").get<std::size_t>();
  p.probability = j.at("probability").get<float>();
  if (j.contains("label") && !j["label"].is_null()) p.label = j["label"].get<std::string>();
  return p;
}

json input_to_json(const InputBlob& in) {
  json j = {{"name", in.name}};
  if (in.url) {
    j["url"] = *in.url;
  } else {
    j["data"] = base64_encode(in.data);
  }
  return j;
}

InputBlob input_from_json(const json& j) {
  return guarded("input", [&] {
    InputBlob in;
    in.name = j.value("name", std::string());
    if (j.contains("url") && !j["url"].is_null()) {
      in.url = j["url"].get<std::string>();
    } else {
      in.data = base64_decode(j.at("data").get<std::string>());
    }
    return in;
  });
}

json to_json(const RunEvaluationRequest& r) {
  json inputs = json::array();
  for (const auto& in : r.inputs) inputs.push_back(input_to_json(in));
  json j = {{"evaluation_id", r.evaluation_id},
            {"manifest", registry::manifest_to_json(r.manifest)},
            {"inputs", inputs},
            {"batch_size", r.batch_size},
            {"top_k", r.top_k},
            {"wait", r.wait},
            {"publish", r.publish}};
  if (r.trace_level) j["trace_level"] = tracer::to_string(*r.trace_level);
  return j;
}

RunEvaluationRequest run_request_from_json(const json& j) {
  return guarded("RunEvaluation", [&] {
    RunEvaluationRequest r;
    r.evaluation_id = j.value("evaluation_id", std::string());
    r.manifest = registry::manifest_from_json(j.at("manifest"));
    for (const auto& in : j.value("inputs", json::array())) r.inputs.push_back(input_from_json(in));
    r.batch_size = j.value("batch_size", std::int64_t{1});
    if (r.batch_size < 1) {
      throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1", "batch_size");
    }
    r.top_k = j.value("top_k", std::size_t{5});
    r.wait = j.value("wait", true);
    r.publish = j.value("publish", false);
    if (j.contains("trace_level") && !j["trace_level"].is_null()) {
      r.trace_level = tracer::parse_trace_level(j["trace_level"].get<std::string>());
      if (!r.trace_level) {
        throw Error(ErrorCode::kInvalidArgument, "unknown trace level", "trace_level");
      }
    }
    return r;
  });
}

std::string_view to_string(EvaluationStatus s) {
  return s == EvaluationStatus::kOk ? "ok" : "failed";
}

json to_json(const EvaluationResult& r) {
  json env = {{"container", r.environment.container}, {"envvars", json::array()}};
  for (const auto& [k, v] : r.environment.envvars) env["envvars"].push_back({k, v});
  json preds = json::array();
  for (const auto& item : r.predictions) {
    json outs = json::array();
    for (const auto& list : item.outputs) {
      json arr = json::array();
      for (const auto& p : list) arr.push_back(prediction_to_json(p));
      outs.push_back(arr);
    }
    preds.push_back({{"input", item.input}, {"outputs", outs}});
  }
  json j = {{"evaluation_id", r.evaluation_id},
            {"agent_id", r.agent_id},
            {"hardware", registry::to_json(r.hardware)},
            {"manifest_key", r.manifest_key},
            {"model", {{"name", r.model_name}, {"version", r.model_version}}},
            {"framework",
             {{"name", r.framework.name}, {"version", r.framework.version.to_string()}}},
            {"batch_size", r.batch_size},
            {"environment", env},
            {"predictions", preds},
            {"latencies_us", r.latencies_us},
            {"end_to_end_us", r.end_to_end_us},
            {"trace_id", r.trace_id},
            {"spans", span_list(r.spans)},
            {"status", to_string(r.status)},
            {"started_at_ms", r.started_at_ms},
            {"completed_at_ms", r.completed_at_ms},
            {"item_count", r.item_count}};
  j["error"] = r.error ? json{{"code", r.error->code}, {"message", r.error->message}} : json();
  return j;
}

EvaluationResult result_from_json(const json& j) {
  return guarded("EvaluationResult", [&] {
    EvaluationResult r;
    r.evaluation_id = j.at("evaluation_id").get<std::string>();
    r.agent_id = j.at("agent_id").get<std::string>();
    r.hardware = registry::hardware_from_json(j.at("hardware"));
    r.manifest_key = j.value("manifest_key", std::string());
    if (j.contains("model")) {
      r.model_name = j["model"].value("name", std::string());
      r.model_version = j["model"].value("version", std::string());
    }
    if (j.contains("framework")) {
      r.framework.name = j["framework"].value("name", std::string());
      const auto v = j["framework"].value("version", std::string());
      if (!v.empty()) r.framework.version = manifest::SemVer::parse(v);
    }
    r.batch_size = j.value("batch_size", std::int64_t{1});
    if (j.contains("environment")) {
      r.environment.container = j["environment"].value("container", std::string());
      for (const auto& kv : j["environment"].value("envvars", json::array())) {
        r.environment.envvars.emplace_back(kv.at(0).get<std::string>(),
                                           kv.at(1).get<std::string>());
      }
    }
    for (const auto& item : j.value("predictions", json::array())) {
      ItemPredictions ip;
      ip.input = item.value("input", std::string());
      for (const auto& list : item.at("outputs")) {
        std::vector<pipeline::Prediction> ps;
        for (const auto& p : list) ps.push_back(prediction_from_json(p));
        ip.outputs.push_back(std::move(ps));
      }
      r.predictions.push_back(std::move(ip));
    }
    r.latencies_us = j.value("latencies_us", std::vector<std::int64_t>{});
    r.end_to_end_us = j.value("end_to_end_us", std::vector<std::int64_t>{});
    r.trace_id = j.value("trace_id", std::string());
    for (const auto& s : j.value("spans", json::array())) r.spans.push_back(tracer::span_from_json(s));
    const auto status = j.value("status", std::string("ok"));
    if (status != "ok" && status != "failed") {
      throw Error(ErrorCode::kProtocolError, "unknown status " + status, "status");
    }
    r.status = status == "ok" ? EvaluationStatus::kOk : EvaluationStatus::kFailed;
    if (j.contains("error") && j["error"].is_object()) {
      r.error = ErrorInfo{j["error"].value("code", std::string()),
                          j["error"].value("message", std::string())};
    }
    r.started_at_ms = j.value("started_at_ms", std::int64_t{0});
    r.completed_at_ms = j.value("completed_at_ms", std::int64_t{0});
    r.item_count = j.value("item_count", std::size_t{0});
    return r;
  });
}

}  // namespace evalmesh::wire
