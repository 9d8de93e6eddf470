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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "evalmesh/common/error.hpp"
#include "evalmesh/orchestrator/metrics.hpp"
#include "evalmesh/orchestrator/store.hpp"
#include "evalmesh/registry/store.hpp"
#include "evalmesh/wire/messages.hpp"

namespace evalmesh::orchestrator {

enum class Dispatch { kOne, kAll };

struct EvaluationRequest {
  // Model identity when no manifest is given inline.
  std::string model_name;
  std::optional<manifest::VersionConstraint> model_version;
  std::optional<std::string> manifest_key;
  std::optional<manifest::Manifest> manifest;
  // Overrides the manifest's framework for agent matching.
  std::optional<manifest::FrameworkSpec> framework;
  registry::HardwareConstraint hardware;
  std::vector<wire::InputBlob> inputs;
  // Paths readable by the agents.
  std::vector<std::string> files;
  // URL of a newline-separated list of input URLs.
  std::optional<std::string> dataset;
  std::vector<std::int64_t> batch_sizes{1};
  std::optional<tracer::TraceLevel> trace_level;
  Dispatch dispatch = Dispatch::kOne;
  std::size_t top_k = 5;
};

// Throws Error(kInvalidArgument) with the offending field.
void validate(const EvaluationRequest& req);
nlohmann::json to_json(const EvaluationRequest& req);
EvaluationRequest request_from_json(const nlohmann::json& j);

struct Job {
  std::string agent_id;
  std::string address;
  std::int64_t batch_size = 1;
  friend bool operator==(const Job&, const Job&) = default;
};

struct EvaluationView {
  std::string evaluation_id;
  std::string manifest_key;
  std::vector<Job> jobs;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::size_t pending = 0;
  std::int64_t submitted_at_ms = 0;
  std::vector<wire::EvaluationResult> results;
};

nlohmann::json to_json(const EvaluationView& v);
EvaluationView view_from_json(const nlohmann::json& j);

struct ComparisonRow {
  std::string input;
  std::optional<pipeline::Prediction> a;
  std::optional<pipeline::Prediction> b;
  bool flipped = false;
};

struct Comparison {
  std::string a_id;
  std::string b_id;
  std::vector<ComparisonRow> rows;
  std::size_t flipped = 0;
  double agreement = 0;
  std::optional<double> a_mean_latency_us;
  std::optional<double> b_mean_latency_us;
  std::optional<double> a_throughput;
  std::optional<double> b_throughput;
};

nlohmann::json to_json(const Comparison& c);

class Orchestrator {
 public:
  struct Options {
    std::chrono::milliseconds call_timeout{10000};
    // Jobs without a result after this long are recorded as failed.
    std::chrono::milliseconds job_timeout{std::chrono::minutes(10)};
    std::chrono::milliseconds expire_interval{1000};
  };

  Orchestrator(std::shared_ptr<registry::RegistryStore> registry,
               std::shared_ptr<ResultStore> results);
  Orchestrator(std::shared_ptr<registry::RegistryStore> registry,
               std::shared_ptr<ResultStore> results, Options options);
  ~Orchestrator();
  Orchestrator(const Orchestrator&) = delete;
  Orchestrator& operator=(const Orchestrator&) = delete;

  // Starts the expiry and job-timeout sweeper.
  void start();
  void stop();

  // Resolves agents synchronously (Error(kNoAgentSatisfiesConstraints)) and
  // dispatches in the background.
  std::string submit(const EvaluationRequest& req);
  // Throws Error(kUnknownEvaluation).
  void collect(const wire::EvaluationResult& result);
  EvaluationView get(const std::string& evaluation_id) const;
  // Blocks until nothing is pending or the timeout passes.
  EvaluationView wait(const std::string& evaluation_id, std::chrono::milliseconds timeout) const;
  std::vector<wire::EvaluationResult> query_history(const HistoryFilter& f) const;
  std::vector<MetricSummary> summarize_evaluation(const std::string& evaluation_id,
                                                  const PriceTable& prices) const;
  Comparison compare(const std::string& a, const std::string& b) const;

  void add_spans(const std::vector<tracer::Span>& spans);
  tracer::TraceTree trace(const std::string& trace_id) const;

  registry::RegistryStore& registry() { return *registry_; }
  // Wire-protocol entry point for agents and remote registry clients.
  nlohmann::json handle_rpc(const std::string& type, const nlohmann::json& body);

  manifest::Manifest resolve_manifest(const EvaluationRequest& req) const;

 private:
  struct JobState {
    Job job;
    bool done = false;
    std::int64_t deadline_ms = 0;
  };
  struct Evaluation {
    std::string id;
    std::string manifest_key;
    std::int64_t submitted_at_ms = 0;
    std::vector<JobState> jobs;
    std::vector<wire::EvaluationResult> results;
  };

  void dispatch(std::string evaluation_id, std::vector<Job> jobs,
                wire::RunEvaluationRequest base);
  void record_failure(const std::string& evaluation_id, const Job& job, ErrorCode code,
                      const std::string& message);
  void sweep();
  EvaluationView view_locked(const Evaluation& e) const;
  std::vector<wire::InputBlob> expand_inputs(const EvaluationRequest& req) const;

  std::shared_ptr<registry::RegistryStore> registry_;
  std::shared_ptr<ResultStore> results_;
  Options options_;
  TraceStore traces_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::map<std::string, Evaluation> evaluations_;
  bool stopping_ = false;
  std::thread sweeper_;
  std::size_t dispatching_ = 0;
};

}  // namespace evalmesh::orchestrator
