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

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "evalmesh/agent/agent.hpp"
#include "evalmesh/common/error.hpp"
#include "evalmesh/pipeline/image.hpp"
#include "evalmesh/predictor/reference.hpp"
#include "evalmesh/registry/store.hpp"
#include "evalmesh/tracer/json.hpp"
#include "evalmesh/wire/registry_rpc.hpp"
#include "ref_models.hpp"

namespace evalmesh::testing {

inline std::vector<std::uint8_t> solid_ppm(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                                           int h = 8, int w = 8) {
  auto img = pipeline::make_image(h, w, ColorLayout::kRGB);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return pipeline::encode_ppm(img);
}

// Registry plus result and span capture on the wire, standing in for the
// orchestrator.
class RegistryHost {
 public:
  explicit RegistryHost(std::uint16_t port = 0) {
    wire::FrameServer::Options o;
    o.port = port;
    server_ = std::make_unique<wire::FrameServer>(
        [this](const std::string& type, const nlohmann::json& body) -> nlohmann::json {
          if (auto r = wire::handle_registry_rpc(store, type, body)) return *r;
          std::lock_guard lock(mu_);
          if (type == wire::msg::kPublishResult) {
            results.push_back(wire::result_from_json(body.at("result")));
          } else if (type == wire::msg::kPublishSpans) {
            for (const auto& s : body.at("spans")) spans.push_back(tracer::span_from_json(s));
          } else {
            throw Error(ErrorCode::kProtocolError, "unexpected " + type);
          }
          cv_.notify_all();
          return nlohmann::json::object();
        },
        o);
    server_->start();
  }

  wire::Endpoint endpoint() const { return server_->endpoint(); }

  bool wait_results(std::size_t n, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, timeout, [&] { return results.size() >= n; });
  }
  std::vector<wire::EvaluationResult> results_copy() {
    std::lock_guard lock(mu_);
    return results;
  }
  std::size_t span_count() {
    std::lock_guard lock(mu_);
    return spans.size();
  }

  registry::InMemoryRegistry store;

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<wire::EvaluationResult> results;
  std::vector<tracer::Span> spans;
  std::unique_ptr<wire::FrameServer> server_;
};

inline std::shared_ptr<predictor::PredictorRegistry> reference_predictors(bool gpu,
                                                                          Clock* clock = nullptr) {
  auto reg = std::make_shared<predictor::PredictorRegistry>();
  predictor::register_reference_predictors(*reg, {}, gpu, clock);
  return reg;
}

inline agent::AgentConfig agent_config(const std::string& id, Accelerator accel,
                                       const TempDir& dir,
                                       std::optional<wire::Endpoint> orchestrator = {}) {
  agent::AgentConfig cfg;
  cfg.agent_id = id;
  cfg.hardware.accelerator = accel;
  cfg.hardware.memory_gb = 16;
  cfg.cache_dir = dir.file("cache-" + id);
  cfg.orchestrator = std::move(orchestrator);
  cfg.heartbeat_ms = 200;
  return cfg;
}

// Manifest whose graph file exists, so asset download succeeds.
inline manifest::Manifest local_manifest(const TempDir& dir, const std::string& name,
                                         const std::string& architecture,
                                         const std::string& graph_text = "{}",
                                         const std::string& constraint = "^1.x") {
  auto m = reference_manifest(name, architecture, constraint);
  const auto graph = dir.file(name + "-graph.json");
  write_text(graph, graph_text);
  m.source.graph_path = graph;
  return m;
}

}  // namespace evalmesh::testing
