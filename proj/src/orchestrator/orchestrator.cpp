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

#include "evalmesh/orchestrator/orchestrator.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "evalmesh/agent/cache.hpp"
#include "evalmesh/common/clock.hpp"
#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"
#include "evalmesh/manifest/selection.hpp"
#include "evalmesh/registry/json.hpp"
#include "evalmesh/tracer/json.hpp"
#include "evalmesh/wire/registry_rpc.hpp"
#include "evalmesh/wire/transport.hpp"

namespace evalmesh::orchestrator {

using nlohmann::json;

namespace {

std::string new_evaluation_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  std::ostringstream out;
  out << "ev-" << std::hex << rng();
  return out.str();
}

json framework_json(const manifest::FrameworkSpec& f) {
  json j = {{"name", f.name}};
  if (f.constraint) j["version"] = f.constraint->raw();
  return j;
}

manifest::FrameworkSpec framework_from(const json& j) {
  manifest::FrameworkSpec f{j.at("name").get<std::string>(), std::nullopt};
  if (j.contains("version") && !j["version"].is_null()) {
    f.constraint = manifest::VersionConstraint::parse(j["version"].get<std::string>());
  }
  return f;
}

}  // namespace

void validate(const EvaluationRequest& req) {
  if (req.model_name.empty() && !req.manifest && !req.manifest_key) {
    throw Error(ErrorCode::kInvalidArgument, "a model name, manifest key or manifest is required",
                "model");
  }
  if (req.batch_sizes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one batch size is required",
                "batch_sizes");
  }
  for (std::size_t i = 0; i < req.batch_sizes.size(); ++i) {
    if (req.batch_sizes[i] < 1 || (i > 0 && req.batch_sizes[i] <= req.batch_sizes[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "batch sizes must be positive and strictly ascending",
                  "batch_sizes[" + std::to_string(i) + "]");
    }
  }
  if (req.inputs.empty() && req.files.empty() && !req.dataset) {
    throw Error(ErrorCode::kInvalidArgument, "no inputs given", "inputs");
  }
  if (req.top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1", "top_k");
}

json to_json(const EvaluationRequest& req) {
  json model = {{"name", req.model_name}};
  if (req.model_version) model["version"] = req.model_version->raw();
  json inputs = json::array();
  for (const auto& in : req.inputs) inputs.push_back(wire::input_to_json(in));
  json j = {{"model", model},
            {"hardware", registry::to_json(req.hardware)},
            {"inputs", inputs},
            {"files", req.files},
            {"batch_sizes", req.batch_sizes},
            {"dispatch", req.dispatch == Dispatch::kAll ? "all" : "one"},
            {"top_k", req.top_k}};
  if (req.manifest_key) j["manifest_key"] = *req.manifest_key;
  if (req.manifest) j["manifest"] = registry::manifest_to_json(*req.manifest);
  if (req.framework) j["framework"] = framework_json(*req.framework);
  if (req.dataset) j["dataset"] = *req.dataset;
  if (req.trace_level) j["trace_level"] = to_lower(tracer::to_string(*req.trace_level));
  return j;
}

EvaluationRequest request_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request must be a JSON object");
  try {
    EvaluationRequest req;
    if (j.contains("model")) {
      const auto& m = j["model"];
      if (m.is_string()) {
        req.model_name = m.get<std::string>();
      } else if (m.is_object()) {
        req.model_name = m.value("name", std::string());
        if (m.contains("version") && !m["version"].is_null()) {
          req.model_version = manifest::VersionConstraint::parse(m["version"].get<std::string>());
        }
      }
    }
    if (j.contains("manifest_key") && !j["manifest_key"].is_null()) {
      req.manifest_key = j["manifest_key"].get<std::string>();
    }
    if (j.contains("manifest") && !j["manifest"].is_null()) {
      req.manifest = registry::manifest_from_json(j["manifest"]);
    }
    if (j.contains("framework") && !j["framework"].is_null()) {
      req.framework = framework_from(j["framework"]);
    }
    if (j.contains("hardware")) req.hardware = registry::hardware_constraint_from_json(j["hardware"]);
    for (const auto& in : j.value("inputs", json::array())) {
      req.inputs.push_back(wire::input_from_json(in));
    }
    req.files = j.value("files", std::vector<std::string>{});
    if (j.contains("dataset") && !j["dataset"].is_null()) {
      req.dataset = j["dataset"].get<std::string>();
    }
    if (j.contains("batch_sizes")) {
      req.batch_sizes = j["batch_sizes"].get<std::vector<std::int64_t>>();
    }
    if (j.contains("trace_level") && !j["trace_level"].is_null()) {
      req.trace_level = tracer::parse_trace_level(j["trace_level"].get<std::string>());
      if (!req.trace_level) {
        throw Error(ErrorCode::kInvalidArgument, "unknown trace level", "trace_level");
      }
    }
    const auto dispatch = to_lower(j.value("dispatch", std::string("one")));
    if (dispatch != "one" && dispatch != "all") {
      throw Error(ErrorCode::kInvalidArgument, "dispatch must be one or all", "dispatch");
    }
    req.dispatch = dispatch == "all" ? Dispatch::kAll : Dispatch::kOne;
    req.top_k = j.value("top_k", std::size_t{5});
    validate(req);
    return req;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed request: ") + e.what());
  }
}

json to_json(const EvaluationView& v) {
  json jobs = json::array();
  for (const auto& job : v.jobs) {
    jobs.push_back(
        {{"agent_id", job.agent_id}, {"address", job.address}, {"batch_size", job.batch_size}});
  }
  json results = json::array();
  for (const auto& r : v.results) results.push_back(wire::to_json(r));
  return {{"evaluation_id", v.evaluation_id},
          {"manifest_key", v.manifest_key},
          {"jobs", jobs},
          {"dispatched", v.jobs.size()},
          {"completed", v.completed},
          {"failed", v.failed},
          {"pending", v.pending},
          {"submitted_at_ms", v.submitted_at_ms},
          {"results", results}};
}

EvaluationView view_from_json(const json& j) {
  EvaluationView v;
  v.evaluation_id = j.at("evaluation_id").get<std::string>();
  v.manifest_key = j.value("manifest_key", std::string());
  for (const auto& job : j.value("jobs", json::array())) {
    v.jobs.push_back({job.at("agent_id").get<std::string>(), job.value("address", std::string()),
                      job.value("batch_size", std::int64_t{1})});
  }
  v.completed = j.value("completed", std::size_t{0});
  v.failed = j.value("failed", std::size_t{0});
  v.pending = j.value("pending", std::size_t{0});
  v.submitted_at_ms = j.value("submitted_at_ms", std::int64_t{0});
  for (const auto& r : j.value("results", json::array())) {
    v.results.push_back(wire::result_from_json(r));
  }
  return v;
}

json to_json(const Comparison& c) {
  json rows = json::array();
  for (const auto& row : c.rows) {
    rows.push_back({{"input", row.input},
                    {"a", row.a ? wire::prediction_to_json(*row.a) : json()},
                    {"b", row.b ? wire::prediction_to_json(*row.b) : json()},
                    {"flipped", row.flipped}});
  }
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(); };
  json delta = json::object();
  if (c.a_mean_latency_us && c.b_mean_latency_us) {
    delta["mean_latency_us"] = *c.b_mean_latency_us - *c.a_mean_latency_us;
  }
  if (c.a_throughput && c.b_throughput) delta["throughput"] = *c.b_throughput - *c.a_throughput;
  return {{"a", c.a_id},
          {"b", c.b_id},
          {"rows", rows},
          {"flipped", c.flipped},
          {"agreement", c.agreement},
          {"metrics",
           {{"a", {{"mean_latency_us", opt(c.a_mean_latency_us)},
                   {"throughput", opt(c.a_throughput)}}},
            {"b", {{"mean_latency_us", opt(c.b_mean_latency_us)},
                   {"throughput", opt(c.b_throughput)}}},
            {"delta", delta}}}};
}

Orchestrator::Orchestrator(std::shared_ptr<registry::RegistryStore> registry,
                           std::shared_ptr<ResultStore> results)
    : Orchestrator(std::move(registry), std::move(results), Options{}) {}

Orchestrator::Orchestrator(std::shared_ptr<registry::RegistryStore> registry,
                           std::shared_ptr<ResultStore> results, Options options)
    : registry_(std::move(registry)), results_(std::move(results)), options_(options) {}

Orchestrator::~Orchestrator() { stop(); }

void Orchestrator::start() {
  std::lock_guard lock(mu_);
  if (sweeper_.joinable()) return;
  stopping_ = false;
  sweeper_ = std::thread([this] {
    std::unique_lock lock(mu_);
    while (!cv_.wait_for(lock, options_.expire_interval, [this] { return stopping_; })) {
      lock.unlock();
      sweep();
      lock.lock();
    }
  });
}

void Orchestrator::stop() {
  std::unique_lock lock(mu_);
  stopping_ = true;
  cv_.notify_all();
  cv_.wait(lock, [this] { return dispatching_ == 0; });
  lock.unlock();
  if (sweeper_.joinable()) sweeper_.join();
}

void Orchestrator::sweep() {
  for (const auto& id : registry_->expire()) spdlog::info("agent {} expired", id);
  const auto now = wall_clock_ms();
  std::vector<std::pair<std::string, Job>> overdue;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, e] : evaluations_) {
      for (const auto& js : e.jobs) {
        if (!js.done && js.deadline_ms <= now) overdue.emplace_back(id, js.job);
      }
    }
  }
  for (const auto& [id, job] : overdue) {
    record_failure(id, job, ErrorCode::kConnectionError,
                   "agent " + job.agent_id + " sent no result within " +
                       std::to_string(options_.job_timeout.count()) + " ms");
  }
}

manifest::Manifest Orchestrator::resolve_manifest(const EvaluationRequest& req) const {
  if (req.manifest) return *req.manifest;
  if (req.manifest_key) {
    for (const auto& m : registry_->find_manifests({})) {
      if (manifest::manifest_key(m) == *req.manifest_key) return m;
    }
    throw Error(ErrorCode::kNotFound, "no manifest stored under " + *req.manifest_key,
                "manifest_key");
  }
  registry::ManifestFilter f;
  f.name = req.model_name;
  f.version = req.model_version;
  if (req.framework) f.framework = req.framework->name;
  auto found = registry_->find_manifests(f);
  if (found.empty()) {
    throw Error(ErrorCode::kNotFound, "no manifest for model " + req.model_name, "model");
  }
  return *std::max_element(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return a.version < b.version;
  });
}

std::vector<wire::InputBlob> Orchestrator::expand_inputs(const EvaluationRequest& req) const {
  auto inputs = req.inputs;
  for (const auto& f : req.files) inputs.push_back({{}, f, f});
  if (req.dataset) {
    agent::DefaultFetcher fetcher;
    const auto bytes = fetcher.fetch(*req.dataset);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    for (std::string line; std::getline(in, line);) {
      line = trim(line);
      if (!line.empty() && !line.starts_with("#")) inputs.push_back({{}, line, line});
    }
  }
  return inputs;
}

std::string Orchestrator::submit(const EvaluationRequest& req) {
  validate(req);
  const auto m = resolve_manifest(req);
  const auto key = manifest::manifest_key(m);

  registry::ResolutionQuery q;
  q.model_name = m.name;
  q.model_version = req.model_version;
  q.framework = req.framework ? req.framework : m.framework;
  q.hardware = req.hardware;
  auto agents = registry_->resolve(q);
  if (agents.empty()) {
    throw Error(ErrorCode::kNoAgentSatisfiesConstraints,
                "no live agent satisfies the constraints for " + key);
  }
  if (req.dispatch == Dispatch::kOne) agents.resize(1);

  wire::RunEvaluationRequest base;
  base.manifest = m;
  if (req.framework) base.manifest.framework = req.framework;
  base.inputs = expand_inputs(req);
  base.trace_level = req.trace_level;
  base.top_k = req.top_k;
  base.wait = false;
  base.publish = true;

  Evaluation e;
  e.id = new_evaluation_id();
  e.manifest_key = key;
  e.submitted_at_ms = wall_clock_ms();
  std::vector<Job> jobs;
  for (const auto& a : agents) {
    for (auto bs : req.batch_sizes) {
      Job job{a.agent_id, a.address, bs};
      jobs.push_back(job);
      e.jobs.push_back({job, false,
                        e.submitted_at_ms + static_cast<std::int64_t>(options_.job_timeout.count())});
    }
  }
  base.evaluation_id = e.id;
  const auto id = e.id;
  {
    std::lock_guard lock(mu_);
    if (stopping_ && sweeper_.joinable()) {
      throw Error(ErrorCode::kInternal, "orchestrator is shutting down");
    }
    evaluations_.emplace(id, std::move(e));
  }
  spdlog::info("evaluation {} of {} dispatched to {} job(s)", id, key, jobs.size());
  dispatch(id, std::move(jobs), std::move(base));
  return id;
}

void Orchestrator::dispatch(std::string evaluation_id, std::vector<Job> jobs,
                            wire::RunEvaluationRequest base) {
  auto shared = std::make_shared<const wire::RunEvaluationRequest>(std::move(base));
  for (auto& job : jobs) {
    {
      std::lock_guard lock(mu_);
      ++dispatching_;
    }
    std::thread([this, evaluation_id, job, shared] {
      try {
        auto req = *shared;
        req.batch_size = job.batch_size;
        wire::WireClient client(wire::parse_endpoint(job.address), options_.call_timeout);
        client.call(wire::msg::kRunEvaluation, wire::to_json(req));
      } catch (const Error& e) {
        record_failure(evaluation_id, job, e.code(), e.what());
      } catch (const std::exception& e) {
        record_failure(evaluation_id, job, ErrorCode::kInternal, e.what());
      }
      std::lock_guard lock(mu_);
      --dispatching_;
      cv_.notify_all();
    }).detach();
  }
}

void Orchestrator::record_failure(const std::string& evaluation_id, const Job& job,
                                  ErrorCode code, const std::string& message) {
  wire::EvaluationResult r;
  r.evaluation_id = evaluation_id;
  r.agent_id = job.agent_id;
  r.batch_size = job.batch_size;
  r.status = wire::EvaluationStatus::kFailed;
  r.error = wire::ErrorInfo{std::string(to_string(code)), message};
  for (const auto& a : registry_->list_agents()) {
    if (a.agent_id == job.agent_id) r.hardware = a.hardware;
  }
  {
    std::lock_guard lock(mu_);
    if (auto it = evaluations_.find(evaluation_id); it != evaluations_.end()) {
      r.manifest_key = it->second.manifest_key;
      r.started_at_ms = it->second.submitted_at_ms;
    }
  }
  r.completed_at_ms = wall_clock_ms();
  spdlog::warn("evaluation {} on {}: {}", evaluation_id, job.agent_id, message);
  try {
    collect(r);
  } catch (const Error&) {
  }
}

void Orchestrator::collect(const wire::EvaluationResult& result) {
  {
    std::lock_guard lock(mu_);
    auto it = evaluations_.find(result.evaluation_id);
    if (it == evaluations_.end()) {
      throw Error(ErrorCode::kUnknownEvaluation, "unknown evaluation " + result.evaluation_id,
                  "evaluation_id");
    }
    auto& e = it->second;
    auto job = std::find_if(e.jobs.begin(), e.jobs.end(), [&](const JobState& js) {
      return js.job.agent_id == result.agent_id && js.job.batch_size == result.batch_size;
    });
    if (job == e.jobs.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "evaluation " + result.evaluation_id + " has no job for agent " +
                      result.agent_id + " at batch size " + std::to_string(result.batch_size));
    }
    // A result for a job already settled (duplicate or after a timeout).
    if (job->done) return;
    job->done = true;
    e.results.push_back(result);
    results_->append(result);
    cv_.notify_all();
  }
  if (!result.spans.empty()) traces_.add(result.spans);
}

EvaluationView Orchestrator::view_locked(const Evaluation& e) const {
  EvaluationView v;
  v.evaluation_id = e.id;
  v.manifest_key = e.manifest_key;
  v.submitted_at_ms = e.submitted_at_ms;
  for (const auto& js : e.jobs) {
    v.jobs.push_back(js.job);
    if (!js.done) ++v.pending;
  }
  v.results = e.results;
  std::sort(v.results.begin(), v.results.end(), history_less);
  for (const auto& r : v.results) (r.ok() ? v.completed : v.failed) += 1;
  return v;
}

EvaluationView Orchestrator::get(const std::string& evaluation_id) const {
  std::lock_guard lock(mu_);
  auto it = evaluations_.find(evaluation_id);
  if (it == evaluations_.end()) {
    throw Error(ErrorCode::kUnknownEvaluation, "unknown evaluation " + evaluation_id);
  }
  return view_locked(it->second);
}

EvaluationView Orchestrator::wait(const std::string& evaluation_id,
                                  std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  auto it = evaluations_.find(evaluation_id);
  if (it == evaluations_.end()) {
    throw Error(ErrorCode::kUnknownEvaluation, "unknown evaluation " + evaluation_id);
  }
  const auto& e = it->second;
  cv_.wait_for(lock, timeout, [&] {
    return std::all_of(e.jobs.begin(), e.jobs.end(), [](const JobState& js) { return js.done; });
  });
  return view_locked(e);
}

std::vector<wire::EvaluationResult> Orchestrator::query_history(const HistoryFilter& f) const {
  return results_->query(f);
}

std::vector<MetricSummary> Orchestrator::summarize_evaluation(const std::string& evaluation_id,
                                                              const PriceTable& prices) const {
  return summarize(get(evaluation_id).results, prices);
}

Comparison Orchestrator::compare(const std::string& a, const std::string& b) const {
  auto first_ok = [](const EvaluationView& v) -> std::optional<wire::EvaluationResult> {
    std::vector<wire::EvaluationResult> ok;
    for (const auto& r : v.results) {
      if (r.ok()) ok.push_back(r);
    }
    if (ok.empty()) return std::nullopt;
    std::sort(ok.begin(), ok.end(), [](const auto& x, const auto& y) {
      return std::tie(x.agent_id, x.batch_size) < std::tie(y.agent_id, y.batch_size);
    });
    return ok.front();
  };
  const auto va = get(a);
  const auto vb = get(b);
  const auto ra = first_ok(va);
  const auto rb = first_ok(vb);
  Comparison c;
  c.a_id = a;
  c.b_id = b;
  auto top1 = [](const std::optional<wire::EvaluationResult>& r,
                 std::size_t i) -> std::optional<pipeline::Prediction> {
    if (!r || i >= r->predictions.size() || r->predictions[i].outputs.empty() ||
        r->predictions[i].outputs[0].empty()) {
      return std::nullopt;
    }
    return r->predictions[i].outputs[0][0];
  };
  const auto n = std::max(ra ? ra->predictions.size() : 0, rb ? rb->predictions.size() : 0);
  for (std::size_t i = 0; i < n; ++i) {
    ComparisonRow row;
    row.input = ra && i < ra->predictions.size() ? ra->predictions[i].input
                                                 : rb->predictions[i].input;
    row.a = top1(ra, i);
    row.b = top1(rb, i);
    row.flipped = !(row.a && row.b && row.a->index == row.b->index);
    c.flipped += row.flipped ? 1 : 0;
    c.rows.push_back(std::move(row));
  }
  c.agreement = n == 0 ? 0.0 : static_cast<double>(n - c.flipped) / static_cast<double>(n);
  auto fill = [](const std::optional<wire::EvaluationResult>& r, std::optional<double>& lat,
                 std::optional<double>& tp) {
    if (!r || r->latencies_us.empty()) return;
    const auto s = summarize({*r});
    lat = s.front().latency.mean_us;
    tp = s.front().throughput;
  };
  fill(ra, c.a_mean_latency_us, c.a_throughput);
  fill(rb, c.b_mean_latency_us, c.b_throughput);
  return c;
}

void Orchestrator::add_spans(const std::vector<tracer::Span>& spans) { traces_.add(spans); }

tracer::TraceTree Orchestrator::trace(const std::string& trace_id) const {
  return traces_.get(trace_id);
}

json Orchestrator::handle_rpc(const std::string& type, const json& body) {
  if (auto r = wire::handle_registry_rpc(*registry_, type, body)) return *r;
  if (type == wire::msg::kPublishResult) {
    collect(wire::result_from_json(body.at("result")));
    return json::object();
  }
  if (type == wire::msg::kPublishSpans) {
    std::vector<tracer::Span> spans;
    for (const auto& s : body.at("spans")) spans.push_back(tracer::span_from_json(s));
    add_spans(spans);
    return json::object();
  }
  throw Error(ErrorCode::kProtocolError, "unknown message type " + type, "type");
}

}  // namespace evalmesh::orchestrator
