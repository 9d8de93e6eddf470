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

#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "evalmesh/registry/records.hpp"
#include "evalmesh/tracer/span.hpp"
#include "evalmesh/wire/messages.hpp"

namespace evalmesh::orchestrator {

struct HistoryFilter {
  // Glob over the model name, case-insensitive.
  std::optional<std::string> model;
  std::optional<manifest::VersionConstraint> model_version;
  // Matches the framework that ran, by name and version.
  std::optional<manifest::FrameworkSpec> framework;
  registry::HardwareConstraint hardware;
  std::optional<std::string> agent_id;
  std::optional<std::string> evaluation_id;
  std::optional<wire::EvaluationStatus> status;
  std::optional<std::int64_t> batch_size;
};

bool matches(const wire::EvaluationResult& r, const HistoryFilter& f);

// Orders by (completed_at_ms, evaluation_id, agent_id, batch_size).
bool history_less(const wire::EvaluationResult& a, const wire::EvaluationResult& b);

// Append-only result log.
class ResultStore {
 public:
  virtual ~ResultStore() = default;
  virtual void append(const wire::EvaluationResult& r) = 0;
  virtual std::vector<wire::EvaluationResult> query(const HistoryFilter& f) const = 0;
};

class InMemoryResultStore final : public ResultStore {
 public:
  void append(const wire::EvaluationResult& r) override;
  std::vector<wire::EvaluationResult> query(const HistoryFilter& f) const override;

 private:
  mutable std::shared_mutex mu_;
  std::vector<wire::EvaluationResult> results_;
};

// One JSON document per line; existing lines are loaded on construction.
class JsonlResultStore final : public ResultStore {
 public:
  explicit JsonlResultStore(std::string path);
  void append(const wire::EvaluationResult& r) override;
  std::vector<wire::EvaluationResult> query(const HistoryFilter& f) const override;

 private:
  std::string path_;
  InMemoryResultStore index_;
  std::mutex write_mu_;
  std::ofstream out_;
};

// Spans keyed by trace id, merged by span id.
class TraceStore {
 public:
  void add(const std::vector<tracer::Span>& spans);
  // Throws Error(kNotFound).
  tracer::TraceTree get(const std::string& trace_id) const;
  bool contains(const std::string& trace_id) const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::map<tracer::SpanId, tracer::Span>> traces_;
};

}  // namespace evalmesh::orchestrator
