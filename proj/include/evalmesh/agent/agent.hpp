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

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "evalmesh/agent/cache.hpp"
#include "evalmesh/common/clock.hpp"
#include "evalmesh/predictor/registry.hpp"
#include "evalmesh/registry/records.hpp"
#include "evalmesh/tracer/tracer.hpp"
#include "evalmesh/wire/messages.hpp"
#include "evalmesh/wire/transport.hpp"

namespace evalmesh::agent {

// Applies the selected container and the manifest's environment variables.
// The default records them and launches nothing.
class EnvironmentProvisioner {
 public:
  virtual ~EnvironmentProvisioner() = default;
  virtual void provision(const std::string& container,
                         const std::vector<std::pair<std::string, std::string>>& envvars) = 0;
  virtual void release(const std::string& container) = 0;
};

class LocalProvisioner final : public EnvironmentProvisioner {
 public:
  void provision(const std::string&,
                 const std::vector<std::pair<std::string, std::string>>&) override {}
  void release(const std::string&) override {}
};

struct AgentConfig {
  std::string agent_id;
  wire::Endpoint listen{"127.0.0.1", 0};
  // Host published in the registry; defaults to the listen host.
  std::string advertise_host;
  std::optional<wire::Endpoint> orchestrator;
  registry::HardwareDescriptor hardware;
  std::string cache_dir;
  std::int64_t heartbeat_ms = registry::kDefaultHeartbeatMs;
  std::int64_t ttl_ms = registry::kDefaultTtlMs;
  int registration_attempts = 20;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::milliseconds max_backoff{2000};
  std::size_t parallelism = 4;
  // Published to the registry after registration.
  std::vector<manifest::Manifest> manifests;
};

struct AgentServices {
  std::shared_ptr<predictor::PredictorRegistry> predictors;
  Clock* clock = nullptr;
  std::shared_ptr<Fetcher> fetcher;
  std::shared_ptr<EnvironmentProvisioner> provisioner;
  // Overrides the PublishSpans sink toward the orchestrator.
  std::shared_ptr<tracer::SpanSink> span_sink;
};

class Agent {
 public:
  Agent(AgentConfig config, AgentServices services);
  ~Agent();
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  // Binds (Error(kBindFailure)) and, with an orchestrator configured,
  // registers with bounded retries (Error(kConnectionError) once they run
  // out) and starts heartbeating.
  void start();
  void stop();

  wire::Endpoint endpoint() const;
  registry::AgentRecord record() const;

  // Never throws for evaluation failures: they come back as failed results.
  wire::EvaluationResult run_evaluation(const wire::RunEvaluationRequest& req);
  nlohmann::json handle_rpc(const std::string& type, const nlohmann::json& body);

  AssetCache& cache() { return *cache_; }
  tracer::Collector* collector() { return collector_.get(); }
  std::size_t pending_publications() const;
  // Blocks until queued jobs and publications are done.
  bool drain(std::chrono::milliseconds timeout);

 private:
  struct LoadedModel {
    std::shared_ptr<predictor::Predictor> predictor;
    predictor::HandleId handle = 0;
  };

  void register_with_retries();
  void heartbeat_loop();
  void worker_loop();
  void publisher_loop();
  void enqueue_publication(wire::EvaluationResult result);
  predictor::ResolvedSource resolve_source(const manifest::Manifest& m);
  std::vector<std::string> load_labels(const manifest::IOSpec& spec);
  wire::EvaluationResult evaluate(const wire::RunEvaluationRequest& req);

  AgentConfig config_;
  AgentServices services_;
  Clock& clock_;
  std::unique_ptr<AssetCache> cache_;
  std::unique_ptr<tracer::Collector> collector_;
  std::unique_ptr<tracer::Tracer> tracer_;
  std::unique_ptr<wire::FrameServer> server_;
  std::unique_ptr<wire::WireClient> orchestrator_;
  std::int64_t started_us_ = 0;

  std::counting_semaphore<1024> slots_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
  bool running_ = false;
  std::deque<wire::RunEvaluationRequest> jobs_;
  std::size_t active_jobs_ = 0;
  std::deque<wire::EvaluationResult> outbox_;
  bool publishing_ = false;
  std::vector<std::thread> workers_;
  std::thread heartbeat_;
  std::thread publisher_;

  std::mutex models_mu_;
  std::map<std::uint64_t, LoadedModel> models_;
  std::uint64_t next_model_ = 1;
};

}  // namespace evalmesh::agent
