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

#include "evalmesh/orchestrator/rest.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"
#include "evalmesh/manifest/document.hpp"
#include "evalmesh/manifest/selection.hpp"
#include "evalmesh/manifest/validate.hpp"
#include "evalmesh/registry/json.hpp"
#include "evalmesh/tracer/json.hpp"

namespace evalmesh::orchestrator {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kSyntaxError:
    case ErrorCode::kSchemaError:
    case ErrorCode::kProtocolError:
      return 400;
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownEvaluation:
    case ErrorCode::kUnknownAgent:
      return 404;
    case ErrorCode::kDuplicateKey:
    case ErrorCode::kNoAgentSatisfiesConstraints:
      return 409;
    case ErrorCode::kNoSuccessfulResults:
      return 422;
    default:
      return 500;
  }
}

json error_body(const Error& e) {
  json err = {{"code", to_string(e.code())}, {"message", e.what()}};
  if (!e.field().empty()) err["field"] = e.field();
  return {{"error", err}};
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("body is not JSON: ") + e.what());
  }
}

std::int64_t parse_int(const std::string& text, const char* field) {
  try {
    std::size_t used = 0;
    const auto v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "not an integer: " + text, field);
}

manifest::VersionConstraint parse_constraint(const std::string& text, const char* field) {
  try {
    return manifest::VersionConstraint::parse(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument, e.what(), field);
  }
}

// Runs `fn`, translating failures into JSON error replies.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    reply(res, http_status(e.code()), error_body(e));
  } catch (const json::exception& e) {
    reply(res, 400, error_body(Error(ErrorCode::kInvalidArgument, e.what())));
  } catch (const std::exception& e) {
    spdlog::error("request failed: {}", e.what());
    reply(res, 500, error_body(Error(ErrorCode::kInternal, e.what())));
  }
}

json manifest_summary(const manifest::Manifest& m) {
  json j = {{"key", manifest::manifest_key(m)},
            {"name", m.name},
            {"version", m.version ? json(m.version->to_string()) : json()},
            {"task", m.task},
            {"manifest", manifest::render_manifest(m)}};
  if (m.framework) {
    j["framework"] = {{"name", m.framework->name},
                      {"version", m.framework->constraint ? json(m.framework->constraint->raw())
                                                          : json()}};
  }
  return j;
}

}  // namespace

HistoryFilter history_filter_from_params(const std::multimap<std::string, std::string>& params) {
  auto get = [&](const char* k) -> std::optional<std::string> {
    auto it = params.find(k);
    if (it == params.end()) return std::nullopt;
    return it->second;
  };
  HistoryFilter f;
  f.model = get("model");
  if (auto v = get("model_version")) f.model_version = parse_constraint(*v, "model_version");
  if (auto fw = get("framework")) {
    f.framework = manifest::FrameworkSpec{*fw, std::nullopt};
    if (auto v = get("framework_version")) {
      f.framework->constraint = parse_constraint(*v, "framework_version");
    }
  } else if (get("framework_version")) {
    throw Error(ErrorCode::kInvalidArgument, "framework_version needs framework",
                "framework_version");
  }
  if (auto a = get("arch")) {
    f.hardware.arch = parse_architecture(*a);
    if (!f.hardware.arch) throw Error(ErrorCode::kInvalidArgument, "unknown arch " + *a, "arch");
  }
  if (auto a = get("accelerator")) {
    f.hardware.accelerator = parse_accelerator(*a);
    if (!f.hardware.accelerator) {
      throw Error(ErrorCode::kInvalidArgument, "unknown accelerator " + *a, "accelerator");
    }
  }
  f.agent_id = get("agent");
  f.evaluation_id = get("evaluation");
  if (auto s = get("status")) {
    const auto v = to_lower(*s);
    if (v == "ok") {
      f.status = wire::EvaluationStatus::kOk;
    } else if (v == "failed") {
      f.status = wire::EvaluationStatus::kFailed;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "status must be ok or failed", "status");
    }
  }
  if (auto b = get("batch_size")) f.batch_size = parse_int(*b, "batch_size");
  return f;
}

RestServer::RestServer(Orchestrator& orchestrator, Options options)
    : orch_(orchestrator), options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
  // No SO_REUSEPORT: a second server on a taken port must fail to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  routes();
}

RestServer::~RestServer() { stop(); }

void RestServer::start() {
  if (thread_.joinable()) return;
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else {
    port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ <= 0) {
    throw Error(ErrorCode::kBindFailure,
                "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void RestServer::stop() {
  if (!thread_.joinable()) return;
  server_->stop();
  thread_.join();
}

void RestServer::routes() {
  auto& s = *server_;

  s.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      reply(res, 200, {{"status", "ok"}, {"agents", orch_.registry().list_agents().size()}});
    });
  });

  s.Get("/models", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      registry::ManifestFilter f;
      f.name = param(req, "name");
      if (auto v = param(req, "version")) f.version = parse_constraint(*v, "version");
      f.framework = param(req, "framework");
      json out = json::array();
      for (const auto& m : orch_.registry().find_manifests(f)) out.push_back(manifest_summary(m));
      reply(res, 200, {{"models", out}});
    });
  });

  s.Post("/manifests", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string text = req.body;
      if (req.get_header_value("Content-Type").find("json") != std::string::npos) {
        text = parse_body(req).at("manifest").get<std::string>();
      }
      const auto report = manifest::validate_document(text);
      if (report.has_errors()) {
        json issues = json::array();
        for (const auto& i : report.issues) {
          issues.push_back({{"severity", to_string(i.severity)},
                            {"field", i.field},
                            {"message", i.message}});
        }
        const auto& first = *std::find_if(report.issues.begin(), report.issues.end(),
                                          [](const auto& i) {
                                            return i.severity == manifest::Severity::kError;
                                          });
        auto body = error_body(Error(ErrorCode::kSchemaError, first.message, first.field));
        body["issues"] = issues;
        reply(res, 400, body);
        return;
      }
      const auto m = manifest::parse_manifest(text);
      const auto key = orch_.registry().put_manifest(m);
      reply(res, 201, {{"key", key}});
    });
  });

  s.Get("/agents", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json out = json::array();
      for (const auto& a : orch_.registry().list_agents()) out.push_back(registry::to_json(a));
      reply(res, 200, {{"agents", out}});
    });
  });

  s.Post("/evaluations", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto id = orch_.submit(request_from_json(parse_body(req)));
      reply(res, 202, to_json(orch_.get(id)));
    });
  });

  s.Get("/evaluations", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json out = json::array();
      for (const auto& r : orch_.query_history(history_filter_from_params(req.params))) {
        out.push_back(wire::to_json(r));
      }
      reply(res, 200, {{"results", out}});
    });
  });

  s.Get(R"(/evaluations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      if (auto w = param(req, "wait_ms")) {
        reply(res, 200,
              to_json(orch_.wait(id, std::chrono::milliseconds(parse_int(*w, "wait_ms")))));
      } else {
        reply(res, 200, to_json(orch_.get(id)));
      }
    });
  });

  s.Get(R"(/evaluations/([^/]+)/summary)",
        [this](const httplib::Request& req, httplib::Response& res) {
          guarded(res, [&] {
            json out = json::array();
            for (const auto& m : orch_.summarize_evaluation(req.matches[1], options_.prices)) {
              out.push_back(to_json(m));
            }
            reply(res, 200, {{"evaluation_id", std::string(req.matches[1])}, {"summaries", out}});
          });
        });

  s.Post("/summaries", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      const auto id = body.at("evaluation_id").get<std::string>();
      auto prices = options_.prices;
      if (body.contains("prices")) {
        for (const auto& [k, v] : parse_price_table(body["prices"])) prices[k] = v;
      }
      json out = json::array();
      for (const auto& m : orch_.summarize_evaluation(id, prices)) out.push_back(to_json(m));
      reply(res, 200, {{"evaluation_id", id}, {"summaries", out}});
    });
  });

  s.Get(R"(/traces/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto tree = orch_.trace(req.matches[1]);
      const bool flat = param(req, "format").value_or("tree") == "flat";
      reply(res, 200, flat ? tracer::flat_to_json(tree) : tracer::tree_to_json(tree));
    });
  });

  s.Get("/comparisons", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto a = param(req, "a");
      const auto b = param(req, "b");
      if (!a || !b) throw Error(ErrorCode::kInvalidArgument, "both a and b are required", "a");
      reply(res, 200, to_json(orch_.compare(*a, *b)));
    });
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const auto code = res.status == 404 ? ErrorCode::kNotFound : ErrorCode::kInvalidArgument;
    reply(res, res.status, error_body(Error(code, "no such endpoint")));
  });
}

OrchestratorServer::OrchestratorServer(std::shared_ptr<registry::RegistryStore> registry,
                                       std::shared_ptr<ResultStore> results, Options options)
    : options_(std::move(options)),
      orch_(std::move(registry), std::move(results), options_.orchestrator),
      wire_([this](const std::string& type, const json& body) {
              return orch_.handle_rpc(type, body);
            },
            wire::FrameServer::Options{options_.host,
                                       static_cast<std::uint16_t>(options_.wire_port)}),
      rest_(orch_, RestServer::Options{options_.host, options_.rest_port, options_.prices}) {}

OrchestratorServer::~OrchestratorServer() { stop(); }

void OrchestratorServer::start() {
  orch_.start();
  wire_.start();
  rest_.start();
  spdlog::info("orchestrator wire {} rest {}", wire_address(), rest_url());
}

void OrchestratorServer::stop() {
  rest_.stop();
  wire_.stop();
  orch_.stop();
}

std::string OrchestratorServer::wire_address() const {
  return options_.host + ":" + std::to_string(wire_.port());
}

std::string OrchestratorServer::rest_url() const {
  return "http://" + options_.host + ":" + std::to_string(rest_.port());
}

}  // namespace evalmesh::orchestrator
