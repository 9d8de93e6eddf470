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

#include "evalmesh/agent/agent.hpp"

#include <spdlog/spdlog.h>

#include <sstream>

#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"
#include "evalmesh/manifest/selection.hpp"
#include "evalmesh/pipeline/pipeline.hpp"
#include "evalmesh/pipeline/postprocess.hpp"
#include "evalmesh/registry/json.hpp"
#include "evalmesh/tracer/json.hpp"
#include "evalmesh/wire/registry_rpc.hpp"

namespace evalmesh::agent {

using nlohmann::json;
using tracer::TraceLevel;

namespace {

// Streams completed spans to the orchestrator's trace store.
class PublishSpansSink final : public tracer::SpanSink {
 public:
  PublishSpansSink(wire::Endpoint ep, std::string agent_id)
      : client_(std::move(ep), std::chrono::seconds(5)), agent_id_(std::move(agent_id)) {}

  void publish(std::span<const tracer::Span> spans) override {
    json arr = json::array();
    for (const auto& s : spans) arr.push_back(tracer::span_to_json(s));
    client_.call(wire::msg::kPublishSpans, {{"agent_id", agent_id_}, {"spans", arr}});
  }

 private:
  wire::WireClient client_;
  std::string agent_id_;
};

// Thrown errors re-coded for the stage they came from.
[[noreturn]] void rethrow_as(ErrorCode code, const std::exception& e) {
  std::string what = e.what();
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    what = std::string(to_string(err->code())) + ": " + what;
  }
  throw Error(code, what);
}

std::string item_name(const wire::InputBlob& in, std::size_t i) {
  if (!in.name.empty()) return in.name;
  if (in.url) return *in.url;
  return "input[" + std::to_string(i) + "]";
}

}  // namespace

Agent::Agent(AgentConfig config, AgentServices services)
    : config_(std::move(config)),
      services_(std::move(services)),
      clock_(services_.clock != nullptr ? *services_.clock : MonotonicClock::instance()),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.parallelism, 1, 1024))) {
  if (config_.agent_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "agent_id must not be empty", "agent_id");
  }
  if (!services_.predictors || services_.predictors->empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one predictor must be registered",
                "predictors");
  }
  if (config_.cache_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cache directory is required", "cache_dir");
  }
  if (!services_.provisioner) services_.provisioner = std::make_shared<LocalProvisioner>();
  if (config_.advertise_host.empty()) config_.advertise_host = config_.listen.host;
  cache_ = std::make_unique<AssetCache>(config_.cache_dir, services_.fetcher);

  auto sink = services_.span_sink;
  if (!sink && config_.orchestrator) {
    sink = std::make_shared<PublishSpansSink>(*config_.orchestrator, config_.agent_id);
  }
  if (sink) collector_ = std::make_unique<tracer::Collector>(sink);
  tracer_ = std::make_unique<tracer::Tracer>(clock_, collector_.get());
  if (config_.orchestrator) {
    orchestrator_ = std::make_unique<wire::WireClient>(*config_.orchestrator,
                                                       std::chrono::seconds(10));
  }
  started_us_ = clock_.now_us();
}

Agent::~Agent() { stop(); }

void Agent::start() {
  wire::FrameServer::Options options;
  options.host = config_.listen.host;
  options.port = config_.listen.port;
  server_ = std::make_unique<wire::FrameServer>(
      [this](const std::string& type, const json& body) { return handle_rpc(type, body); },
      options);
  server_->start();
  {
    std::lock_guard lock(mu_);
    stopping_ = false;
    running_ = true;
  }
  for (std::size_t i = 0; i < std::max<std::size_t>(config_.parallelism, 1); ++i) {
    workers_.emplace_back([this] { worker_loop(); });
  }
  publisher_ = std::thread([this] { publisher_loop(); });
  if (orchestrator_) {
    try {
      register_with_retries();
    } catch (...) {
      stop();
      throw;
    }
    heartbeat_ = std::thread([this] { heartbeat_loop(); });
  }
  spdlog::info("agent {} serving on {}", config_.agent_id, endpoint().to_string());
}

void Agent::stop() {
  {
    std::lock_guard lock(mu_);
    if (!running_ && !server_) return;
    stopping_ = true;
    running_ = false;
  }
  cv_.notify_all();
  if (heartbeat_.joinable()) heartbeat_.join();
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  workers_.clear();
  if (publisher_.joinable()) publisher_.join();
  if (server_) server_->stop();
  server_.reset();
  if (collector_) collector_->shutdown(true);
}

wire::Endpoint Agent::endpoint() const {
  return {config_.advertise_host, server_ ? server_->port() : config_.listen.port};
}

registry::AgentRecord Agent::record() const {
  registry::AgentRecord rec;
  rec.agent_id = config_.agent_id;
  rec.address = endpoint().to_string();
  rec.hardware = config_.hardware;
  for (const auto& e : services_.predictors->entries()) {
    rec.frameworks.push_back({e.framework, e.version});
  }
  rec.ttl_ms = config_.ttl_ms;
  return rec;
}

void Agent::register_with_retries() {
  auto backoff = config_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      orchestrator_->call(wire::msg::kRegisterAgent, {{"agent", registry::to_json(record())}});
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kConnectionError || attempt >= config_.registration_attempts) {
        throw Error(ErrorCode::kConnectionError,
                    "registration failed after " + std::to_string(attempt) +
                        " attempts: " + e.what());
      }
      spdlog::warn("agent {}: registry unreachable ({}), retrying in {} ms", config_.agent_id,
                   e.what(), backoff.count());
      std::unique_lock lock(mu_);
      if (cv_.wait_for(lock, backoff, [this] { return stopping_; })) {
        throw Error(ErrorCode::kConnectionError, "stopped while registering");
      }
      backoff = std::min(backoff * 2, config_.max_backoff);
    }
  }
  for (const auto& m : config_.manifests) {
    try {
      orchestrator_->call(wire::msg::kPutManifest, {{"manifest", registry::manifest_to_json(m)}});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDuplicateKey) throw;
      spdlog::warn("agent {}: {}", config_.agent_id, e.what());
    }
  }
}

void Agent::heartbeat_loop() {
  const auto interval = std::chrono::milliseconds(std::max<std::int64_t>(config_.heartbeat_ms, 1));
  std::unique_lock lock(mu_);
  while (!cv_.wait_for(lock, interval, [this] { return stopping_; })) {
    lock.unlock();
    try {
      orchestrator_->call(wire::msg::kHeartbeat, {{"agent_id", config_.agent_id}});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kUnknownAgent) {
        spdlog::info("agent {} was expired; registering again", config_.agent_id);
        try {
          orchestrator_->call(wire::msg::kRegisterAgent, {{"agent", registry::to_json(record())}});
        } catch (const Error& again) {
          spdlog::warn("agent {}: re-registration failed: {}", config_.agent_id, again.what());
        }
      } else {
        spdlog::warn("agent {}: heartbeat failed: {}", config_.agent_id, e.what());
      }
    }
    lock.lock();
  }
}

void Agent::worker_loop() {
  std::unique_lock lock(mu_);
  while (true) {
    cv_.wait(lock, [this] { return stopping_ || !jobs_.empty(); });
    if (jobs_.empty()) return;
    auto job = std::move(jobs_.front());
    jobs_.pop_front();
    ++active_jobs_;
    lock.unlock();
    auto result = run_evaluation(job);
    if (job.publish) enqueue_publication(std::move(result));
    lock.lock();
    --active_jobs_;
    cv_.notify_all();
  }
}

void Agent::enqueue_publication(wire::EvaluationResult result) {
  {
    std::lock_guard lock(mu_);
    outbox_.push_back(std::move(result));
  }
  cv_.notify_all();
}

void Agent::publisher_loop() {
  auto backoff = config_.initial_backoff;
  std::unique_lock lock(mu_);
  while (true) {
    cv_.wait(lock, [this] {
      return !outbox_.empty() || (stopping_ && jobs_.empty() && active_jobs_ == 0);
    });
    if (outbox_.empty()) return;
    auto result = outbox_.front();
    publishing_ = true;
    lock.unlock();
    bool sent = false;
    if (!orchestrator_) {
      sent = true;
    } else {
      try {
        orchestrator_->call(wire::msg::kPublishResult, {{"result", wire::to_json(result)}});
        sent = true;
      } catch (const Error& e) {
        // Rejections other than transport failures will not improve on retry.
        sent = e.code() != ErrorCode::kConnectionError;
        spdlog::warn("agent {}: publishing {} failed: {}", config_.agent_id,
                     result.evaluation_id, e.what());
      }
    }
    lock.lock();
    publishing_ = false;
    if (sent) {
      outbox_.pop_front();
      backoff = config_.initial_backoff;
      cv_.notify_all();
    } else {
      if (stopping_) return;
      cv_.wait_for(lock, backoff, [this] { return stopping_; });
      backoff = std::min(backoff * 2, config_.max_backoff);
    }
  }
}

std::size_t Agent::pending_publications() const {
  std::lock_guard lock(mu_);
  return outbox_.size() + jobs_.size() + active_jobs_;
}

bool Agent::drain(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  const bool done = cv_.wait_for(lock, timeout, [this] {
    return jobs_.empty() && active_jobs_ == 0 && outbox_.empty() && !publishing_;
  });
  lock.unlock();
  if (collector_) collector_->flush(timeout);
  return done;
}

predictor::ResolvedSource Agent::resolve_source(const manifest::Manifest& m) {
  const auto& src = m.source;
  predictor::ResolvedSource out;
  if (!src.graph_path.empty()) {
    out.graph_path = cache_->get(manifest::resolve_source_url(src, src.graph_path),
                                 src.graph_checksum);
  }
  if (src.weights_path && !src.weights_path->empty()) {
    out.weights_path = cache_->get(manifest::resolve_source_url(src, *src.weights_path),
                                   src.weights_checksum);
  }
  return out;
}

std::vector<std::string> Agent::load_labels(const manifest::IOSpec& spec) {
  std::vector<std::string> labels;
  if (!spec.features_url) return labels;
  const auto bytes = cache_->read(*spec.features_url);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    labels.push_back(line);
  }
  return labels;
}

wire::EvaluationResult Agent::run_evaluation(const wire::RunEvaluationRequest& req) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return evaluate(req);
}

wire::EvaluationResult Agent::evaluate(const wire::RunEvaluationRequest& req) {
  const auto& m = req.manifest;
  wire::EvaluationResult r;
  r.evaluation_id = req.evaluation_id;
  r.agent_id = config_.agent_id;
  r.hardware = config_.hardware;
  r.model_name = m.name;
  r.model_version = m.version ? m.version->to_string() : "";
  r.batch_size = req.batch_size;
  r.item_count = req.inputs.size();
  r.environment.envvars = m.envvars;
  r.started_at_ms = wall_clock_ms();

  tracer::TraceContext ctx{tracer_.get(), {}, req.trace_level};
  if (req.trace_level) {
    ctx.trace_id = tracer::Tracer::new_trace_id();
    r.trace_id = ctx.trace_id;
  }
  const auto root = ctx.start(tracer::kNullSpan, TraceLevel::kModel, "evaluation");
  if (root != tracer::kNullSpan) {
    tracer_->tag(root, "evaluation_id", req.evaluation_id);
    tracer_->tag(root, "agent_id", config_.agent_id);
    tracer_->tag(root, "model", m.name);
    tracer_->tag(root, "batch_size", std::to_string(req.batch_size));
  }

  std::shared_ptr<predictor::Predictor> pred;
  predictor::HandleId handle = 0;
  bool loaded = false;
  bool provisioned = false;
  try {
    r.manifest_key = manifest::manifest_key(m);
    std::optional<predictor::PredictorEntry> entry;
    if (m.framework) entry = services_.predictors->find(*m.framework);
    if (!entry) {
      throw Error(ErrorCode::kNoPredictor,
                  "no registered predictor satisfies " +
                      (m.framework ? m.framework->name + " " +
                                         (m.framework->constraint ? m.framework->constraint->raw()
                                                                  : std::string("*"))
                                   : std::string("a manifest without framework")));
    }
    pred = entry->predictor;
    r.framework = {entry->framework, entry->version};
    if (m.inputs.empty()) throw Error(ErrorCode::kPipelineError, "manifest declares no inputs");

    if (!m.containers.empty()) {
      r.environment.container = manifest::select_container(
          m.containers, config_.hardware.arch, config_.hardware.accelerator);
    }
    services_.provisioner->provision(r.environment.container, m.envvars);
    provisioned = true;

    const auto source = resolve_source(m);
    std::vector<std::vector<std::string>> labels;
    for (const auto& out : m.outputs) labels.push_back(load_labels(out));
    std::vector<std::vector<std::uint8_t>> blobs;
    for (const auto& in : req.inputs) {
      blobs.push_back(in.url ? cache_->read(*in.url) : in.data);
    }

    predictor::OpenRequest open;
    open.manifest_key = r.manifest_key;
    open.manifest = m;
    open.source = source;
    open.device = config_.hardware.accelerator == Accelerator::kGpu
                      ? predictor::Device::kGpuSimulated
                      : predictor::Device::kCpu;
    open.batch_size = static_cast<int>(req.batch_size);
    open.trace = ctx;
    open.parent = root;
    handle = pred->model_load(open).id;
    loaded = true;

    const auto& spec = m.inputs.front();
    const auto n = blobs.size();
    const auto bs = static_cast<std::size_t>(req.batch_size);
    for (std::size_t start = 0; start < n; start += bs) {
      const auto t0 = clock_.now_us();
      std::vector<pipeline::Tensor> items;
      for (std::size_t i = start; i < std::min(n, start + bs); ++i) {
        try {
          items.push_back(pipeline::run_pipeline(
              spec.steps, pipeline::PipelineInput(blobs[i]),
              pipeline::PipelineOptions{&spec, ctx, root}));
        } catch (const std::exception& e) {
          rethrow_as(ErrorCode::kPipelineError, e);
        }
      }
      predictor::PredictionResponse resp;
      std::int64_t t1 = 0, t2 = 0;
      try {
        auto batch = pipeline::stack_batch(items);
        t1 = clock_.now_us();
        resp = pred->predict({handle, std::move(batch), ctx, root});
        t2 = clock_.now_us();
      } catch (const std::exception& e) {
        rethrow_as(ErrorCode::kPredictError, e);
      }
      for (std::size_t i = start; i < std::min(n, start + bs); ++i) {
        r.predictions.push_back({item_name(req.inputs[i], i), {}});
      }
      for (std::size_t o = 0; o < resp.outputs.size(); ++o) {
        const auto& t = resp.outputs[o];
        const auto rows = static_cast<std::size_t>(t.shape.at(0));
        const auto per = t.f32.size() / std::max<std::size_t>(rows, 1);
        const auto* lbl = o < labels.size() && !labels[o].empty() ? &labels[o] : nullptr;
        const bool is_class = o < m.outputs.size() &&
                              m.outputs[o].modality == manifest::Modality::kClass;
        for (std::size_t row = 0; row < rows; ++row) {
          std::span<const float> values(t.f32.data() + row * per, per);
          std::vector<pipeline::Prediction> top;
          if (is_class) {
            const auto idx = static_cast<std::size_t>(values[0]);
            top.push_back({idx,
                           lbl != nullptr && idx < lbl->size() ? std::optional((*lbl)[idx])
                                                               : std::nullopt,
                           1.0F});
          } else {
            top = pipeline::top_k(values, std::min(req.top_k, per), lbl);
          }
          r.predictions[start + row].outputs.push_back(std::move(top));
        }
      }
      const auto t3 = clock_.now_us();
      r.latencies_us.push_back(t2 - t1);
      r.end_to_end_us.push_back(t3 - t0);
    }
    loaded = false;
    pred->model_unload(handle);
    r.status = wire::EvaluationStatus::kOk;
  } catch (const std::exception& e) {
    r.status = wire::EvaluationStatus::kFailed;
    const auto* err = dynamic_cast<const Error*>(&e);
    r.error = wire::ErrorInfo{std::string(to_string(err ? err->code() : ErrorCode::kInternal)),
                              e.what()};
    r.predictions.clear();
    if (loaded) {
      try {
        pred->model_unload(handle);
      } catch (...) {
      }
    }
    spdlog::warn("agent {}: evaluation {} failed: {} {}", config_.agent_id, req.evaluation_id,
                 r.error->code, r.error->message);
  }
  if (provisioned) services_.provisioner->release(r.environment.container);

  if (root != tracer::kNullSpan) {
    tracer_->tag(root, "status", std::string(wire::to_string(r.status)));
    ctx.end(root);
    try {
      r.spans = tracer::flatten(tracer_->export_trace(ctx.trace_id));
    } catch (const Error& e) {
      spdlog::warn("agent {}: trace {} not exported: {}", config_.agent_id, ctx.trace_id,
                   e.what());
    }
    tracer_->discard(ctx.trace_id);
  }
  r.completed_at_ms = wall_clock_ms();
  return r;
}

json Agent::handle_rpc(const std::string& type, const json& body) {
  namespace msg = wire::msg;
  if (type == msg::kHealth) {
    json fws = json::array();
    for (const auto& fw : record().frameworks) {
      fws.push_back({{"name", fw.name}, {"version", fw.version.to_string()}});
    }
    std::size_t open = 0;
    {
      std::lock_guard lock(models_mu_);
      open = models_.size();
    }
    return {{"agent_id", config_.agent_id},
            {"hardware", registry::to_json(config_.hardware)},
            {"frameworks", fws},
            {"uptime_ms", (clock_.now_us() - started_us_) / 1000},
            {"open_handles", open},
            {"pending", pending_publications()}};
  }
  if (type == msg::kRunEvaluation) {
    auto req = wire::run_request_from_json(body);
    if (req.wait) {
      auto result = run_evaluation(req);
      if (req.publish) enqueue_publication(result);
      return {{"result", wire::to_json(result)}};
    }
    {
      std::lock_guard lock(mu_);
      if (stopping_) throw Error(ErrorCode::kConnectionError, "agent is stopping");
      jobs_.push_back(std::move(req));
    }
    cv_.notify_all();
    return {{"accepted", true}, {"evaluation_id", body.value("evaluation_id", std::string())}};
  }
  if (type == msg::kModelLoad) {
    auto m = registry::manifest_from_json(body.at("manifest"));
    if (!m.framework) throw Error(ErrorCode::kNoPredictor, "manifest has no framework");
    auto entry = services_.predictors->find(*m.framework);
    if (!entry) throw Error(ErrorCode::kNoPredictor, "no predictor for " + m.framework->name);
    predictor::OpenRequest open;
    open.manifest_key = manifest::manifest_key(m);
    open.manifest = m;
    open.source = resolve_source(m);
    open.batch_size = body.value("batch_size", 1);
    open.device = config_.hardware.accelerator == Accelerator::kGpu
                      ? predictor::Device::kGpuSimulated
                      : predictor::Device::kCpu;
    if (body.contains("device")) {
      const auto d = predictor::parse_device(body["device"].get<std::string>());
      if (!d) throw Error(ErrorCode::kInvalidArgument, "unknown device", "device");
      open.device = *d;
    }
    auto h = entry->predictor->model_load(open);
    std::lock_guard lock(models_mu_);
    const auto id = next_model_++;
    models_[id] = {entry->predictor, h.id};
    return {{"handle", id},
            {"manifest_key", h.manifest_key},
            {"parameter_count", h.parameter_count},
            {"layers", h.layers}};
  }
  if (type == msg::kPredict || type == msg::kModelUnload) {
    const auto id = body.at("handle").get<std::uint64_t>();
    LoadedModel lm;
    {
      std::lock_guard lock(models_mu_);
      const auto it = models_.find(id);
      if (it == models_.end()) {
        throw Error(ErrorCode::kClosedHandle, "handle " + std::to_string(id) + " is not open");
      }
      lm = it->second;
      if (type == msg::kModelUnload) models_.erase(it);
    }
    if (type == msg::kModelUnload) {
      lm.predictor->model_unload(lm.handle);
      return json::object();
    }
    auto resp = lm.predictor->predict({lm.handle, wire::tensor_from_json(body.at("batch")), {}, 0});
    json outs = json::array();
    for (const auto& t : resp.outputs) outs.push_back(wire::tensor_to_json(t));
    return {{"outputs", outs}};
  }
  throw Error(ErrorCode::kProtocolError, "unknown message type " + type, "type");
}

}  // namespace evalmesh::agent
