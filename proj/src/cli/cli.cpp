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

#include "evalmesh/cli/cli.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "evalmesh/agent/agent.hpp"
#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"
#include "evalmesh/manifest/document.hpp"
#include "evalmesh/manifest/validate.hpp"
#include "evalmesh/orchestrator/rest.hpp"
#include "evalmesh/predictor/reference.hpp"
#include "evalmesh/registry/json.hpp"
#include "evalmesh/tracer/json.hpp"

namespace evalmesh::cli {

using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

// Failure of a REST call or of local input handling, carrying the exit code.
struct Failure {
  int exit_code;
  json body;
};

Failure user_error(ErrorCode code, const std::string& message, const std::string& field = {}) {
  return {kExitUser, orchestrator::error_body(Error(code, message, field))};
}

class RestClient {
 public:
  explicit RestClient(const std::string& url) : url_(url), client_(url) {
    client_.set_connection_timeout(5, 0);
    client_.set_read_timeout(120, 0);
    client_.set_write_timeout(60, 0);
  }

  json get(const std::string& path) { return check(client_.Get(path)); }
  json post(const std::string& path, const std::string& body, const char* type) {
    return check(client_.Post(path, body, type));
  }

 private:
  json check(const httplib::Result& res) {
    if (!res) {
      throw Failure{kExitInternal,
                    orchestrator::error_body(Error(ErrorCode::kConnectionError,
                                                   "cannot reach orchestrator at " + url_ + ": " +
                                                       httplib::to_string(res.error())))};
    }
    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded()) {
      throw Failure{kExitInternal,
                    orchestrator::error_body(Error(ErrorCode::kProtocolError,
                                                   "non-JSON reply with status " +
                                                       std::to_string(res->status)))};
    }
    if (res->status >= 500) throw Failure{kExitInternal, body};
    if (res->status >= 400) throw Failure{kExitUser, body};
    return body;
  }

  std::string url_;
  httplib::Client client_;
};

std::string encode_path(const std::string& s) { return httplib::detail::encode_url(s); }

std::string query_string(const std::vector<std::pair<std::string, std::string>>& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    out += (out.empty() ? "?" : "&") + k + "=" + httplib::detail::encode_query_param(v);
  }
  return out;
}

std::string read_text(const std::string& path) {
  try {
    const auto bytes = read_file_bytes(path);
    return {bytes.begin(), bytes.end()};
  } catch (const Error& e) {
    throw user_error(ErrorCode::kNotFound, e.what(), path);
  }
}

json read_json_file(const std::string& path) {
  auto j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded()) throw user_error(ErrorCode::kSyntaxError, path + " is not JSON", path);
  return j;
}

std::string fmt_us(double us) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(1) << us;
  return o.str();
}

std::string fmt_prediction(const json& p) {
  if (p.is_null()) return "-";
  std::ostringstream o;
  o << p.at("index").get<std::size_t>();
  if (p.contains("label") && !p["label"].is_null()) o << " (" << p["label"].get<std::string>() << ")";
  o << " " << std::fixed << std::setprecision(4) << p.at("probability").get<double>();
  return o.str();
}

// ---- human renderers ----

void print_view(std::ostream& out, const json& v) {
  out << "evaluation " << v.at("evaluation_id").get<std::string>() << " ("
      << v.value("manifest_key", "") << "): " << v.at("completed") << " completed, "
      << v.at("failed") << " failed, " << v.at("pending") << " pending\n";
  for (const auto& r : v.at("results")) {
    const auto& lat = r.at("latencies_us");
    double mean = 0;
    for (const auto& l : lat) mean += l.get<double>();
    if (!lat.empty()) mean /= static_cast<double>(lat.size());
    out << "  " << std::left << std::setw(16) << r.at("agent_id").get<std::string>()
        << " batch " << std::setw(4) << r.at("batch_size").get<std::int64_t>() << " "
        << std::setw(7) << r.at("status").get<std::string>();
    if (r["error"].is_object()) {
      out << r["error"]["code"].get<std::string>() << ": "
          << r["error"]["message"].get<std::string>();
    } else {
      out << "mean " << fmt_us(mean) << " us  trace " << r.value("trace_id", "");
    }
    out << "\n";
    for (const auto& item : r.at("predictions")) {
      const auto& outputs = item.at("outputs");
      const json top = outputs.empty() || outputs[0].empty() ? json() : outputs[0][0];
      out << "    " << item.at("input").get<std::string>() << "  " << fmt_prediction(top) << "\n";
    }
  }
}

void print_results(std::ostream& out, const json& results) {
  for (const auto& r : results) {
    out << r.at("completed_at_ms").get<std::int64_t>() << "  "
        << r.at("evaluation_id").get<std::string>() << "  " << r.at("agent_id").get<std::string>()
        << "  " << r["model"].value("name", "") << ":" << r["model"].value("version", "") << "  "
        << r["framework"].value("name", "") << "@" << r["framework"].value("version", "")
        << "  batch " << r.at("batch_size").get<std::int64_t>() << "  "
        << r.at("status").get<std::string>() << "\n";
  }
  out << results.size() << " result(s)\n";
}

void print_summaries(std::ostream& out, const json& summaries) {
  out << std::left << std::setw(16) << "agent" << std::setw(7) << "batch" << std::setw(9)
      << "batches" << std::setw(12) << "mean_us" << std::setw(12) << "p50_us" << std::setw(12)
      << "p99_us" << std::setw(14) << "img/s"
      << "$/1M\n";
  for (const auto& s : summaries) {
    const auto& l = s.at("latency_us");
    out << std::left << std::setw(16) << s.at("agent_id").get<std::string>() << std::setw(7)
        << s.at("batch_size").get<std::int64_t>() << std::setw(9) << s.at("batches").get<std::size_t>()
        << std::setw(12) << fmt_us(l.at("mean").get<double>()) << std::setw(12)
        << fmt_us(l.at("p50").get<double>()) << std::setw(12) << fmt_us(l.at("p99").get<double>())
        << std::setw(14) << fmt_us(s.at("throughput").get<double>());
    if (s["cost_per_million"].is_null()) {
      out << "-";
    } else {
      out << std::fixed << std::setprecision(4) << s["cost_per_million"].get<double>();
    }
    out << "\n";
  }
}

void print_tree(std::ostream& out, const tracer::SpanNode& node, int depth) {
  const auto& s = node.span;
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << s.name << " ["
      << tracer::to_string(s.level) << "] " << s.duration_us() << " us\n";
  for (const auto& c : node.children) print_tree(out, c, depth + 1);
}

void print_comparison(std::ostream& out, const json& c) {
  out << "a: " << c.at("a").get<std::string>() << "\nb: " << c.at("b").get<std::string>() << "\n";
  for (const auto& row : c.at("rows")) {
    out << (row.at("flipped").get<bool>() ? "* " : "  ") << std::left << std::setw(24)
        << row.at("input").get<std::string>() << std::setw(28) << fmt_prediction(row["a"])
        << fmt_prediction(row["b"]) << "\n";
  }
  const auto n = c.at("rows").size();
  const auto flipped = c.at("flipped").get<std::size_t>();
  out << "agreement " << (n - flipped) << "/" << n << " (" << std::fixed << std::setprecision(1)
      << c.at("agreement").get<double>() * 100 << "%), " << flipped << " flipped\n";
  const auto& delta = c.at("metrics").at("delta");
  if (delta.contains("mean_latency_us")) {
    out << "mean latency delta " << fmt_us(delta["mean_latency_us"].get<double>()) << " us\n";
  }
  if (delta.contains("throughput")) {
    out << "throughput delta " << fmt_us(delta["throughput"].get<double>()) << " img/s\n";
  }
}

// ---- option parsing helpers ----

Architecture arch_option(const std::string& s) {
  auto a = parse_architecture(s);
  if (!a) throw user_error(ErrorCode::kInvalidArgument, "unknown arch " + s, "arch");
  return *a;
}

Accelerator accelerator_option(const std::string& s) {
  auto a = parse_accelerator(s);
  if (!a) throw user_error(ErrorCode::kInvalidArgument, "unknown accelerator " + s, "accelerator");
  return *a;
}

std::map<std::string, std::string> label_options(const std::vector<std::string>& labels) {
  std::map<std::string, std::string> out;
  for (const auto& l : labels) {
    const auto eq = l.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw user_error(ErrorCode::kInvalidArgument, "labels are key=value: " + l, "label");
    }
    out[l.substr(0, eq)] = l.substr(eq + 1);
  }
  return out;
}

manifest::VersionConstraint constraint_option(const std::string& s, const char* field) {
  try {
    return manifest::VersionConstraint::parse(s);
  } catch (const Error& e) {
    throw user_error(ErrorCode::kInvalidArgument, e.what(), field);
  }
}

std::vector<manifest::Manifest> load_manifests(const std::vector<std::string>& paths) {
  std::vector<manifest::Manifest> out;
  for (const auto& p : paths) {
    try {
      out.push_back(manifest::parse_manifest(read_text(p)));
    } catch (const Error& e) {
      throw user_error(e.code(), p + ": " + e.what(), e.field());
    }
  }
  return out;
}

void wait_for_stop() {
  while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
}

void write_ready_file(const std::string& path, const json& j) {
  if (path.empty()) return;
  const auto tmp = path + ".part";
  {
    std::ofstream f(tmp);
    f << j.dump() << "\n";
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void request_stop() { g_stop.store(true); }

std::string resolve_address(const AddressSources& sources) {
  if (sources.flag && !sources.flag->empty()) return *sources.flag;
  if (auto it = sources.env.find(kAddressEnv); it != sources.env.end() && !it->second.empty()) {
    return it->second;
  }
  std::optional<std::string> path = sources.config_path;
  if (!path) {
    if (auto it = sources.env.find(kConfigEnv); it != sources.env.end() && !it->second.empty()) {
      path = it->second;
    } else if (auto home = sources.env.find("HOME"); home != sources.env.end()) {
      const auto candidate = home->second + "/.config/evalmesh/config.json";
      if (std::filesystem::exists(candidate)) path = candidate;
    }
  }
  if (path) {
    const auto j = read_json_file(*path);
    if (j.is_object() && j.contains("orchestrator") && j["orchestrator"].is_string()) {
      return j["orchestrator"].get<std::string>();
    }
    throw user_error(ErrorCode::kSchemaError, *path + " has no \"orchestrator\" string",
                     "orchestrator");
  }
  return kDefaultAddress;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"evalmesh: distributed model evaluation", "evalmesh"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  bool as_json = false;
  std::string orchestrator_flag;
  std::string config_path;
  app.add_flag("--json", as_json, "Machine-readable output");
  app.add_option("--orchestrator", orchestrator_flag, "Orchestrator REST URL");
  app.add_option("--config", config_path, "JSON config file with an \"orchestrator\" key");

  // orchestrator serve
  auto* orch_cmd = app.add_subcommand("orchestrator", "Run the orchestrator");
  orch_cmd->require_subcommand(1);
  auto* orch_serve = orch_cmd->add_subcommand("serve", "Serve the wire and REST endpoints");
  std::string o_host = "127.0.0.1", o_history, o_prices, o_ready;
  int o_wire_port = 7070, o_rest_port = 8080;
  std::int64_t o_job_timeout_ms = 600'000;
  orch_serve->add_option("--host", o_host, "Bind address");
  orch_serve->add_option("--wire-port", o_wire_port, "Agent-facing port (0 picks one)");
  orch_serve->add_option("--rest-port", o_rest_port, "REST port (0 picks one)");
  orch_serve->add_option("--history", o_history, "JSON-lines result history file");
  orch_serve->add_option("--prices", o_prices, "JSON price table, dollars per hour");
  orch_serve->add_option("--job-timeout-ms", o_job_timeout_ms, "Fail jobs with no result after");
  orch_serve->add_option("--ready-file", o_ready, "Write the bound addresses here once serving");

  // agent serve
  auto* agent_cmd = app.add_subcommand("agent", "Run an agent");
  agent_cmd->require_subcommand(1);
  auto* agent_serve = agent_cmd->add_subcommand("serve", "Register and serve evaluations");
  std::string a_id, a_registry, a_listen = "127.0.0.1:0", a_advertise, a_arch = "amd64",
                                a_accel = "cpu", a_cache, a_ready;
  double a_memory = 0;
  std::vector<std::string> a_labels, a_manifests, a_versions;
  std::int64_t a_heartbeat = registry::kDefaultHeartbeatMs, a_ttl = registry::kDefaultTtlMs;
  std::size_t a_parallelism = 4;
  agent_serve->add_option("--id", a_id, "Agent id")->required();
  agent_serve->add_option("--registry", a_registry, "Orchestrator wire address host:port")
      ->required();
  agent_serve->add_option("--listen", a_listen, "Wire listen address host:port");
  agent_serve->add_option("--advertise-host", a_advertise, "Host published to the registry");
  agent_serve->add_option("--arch", a_arch, "amd64, arm64 or ppc64le");
  agent_serve->add_option("--accelerator", a_accel, "cpu or gpu");
  agent_serve->add_option("--memory-gb", a_memory, "Advertised memory");
  agent_serve->add_option("--label", a_labels, "Hardware label key=value");
  agent_serve->add_option("--cache-dir", a_cache, "Asset cache directory");
  agent_serve->add_option("--manifest", a_manifests, "Manifest file to publish");
  agent_serve->add_option("--framework-version", a_versions, "refnn versions to offer");
  agent_serve->add_option("--heartbeat-ms", a_heartbeat, "Heartbeat period");
  agent_serve->add_option("--ttl-ms", a_ttl, "Registry time to live");
  agent_serve->add_option("--parallelism", a_parallelism, "Concurrent evaluations");
  agent_serve->add_option("--ready-file", a_ready, "Write the bound address here once serving");

  // manifest validate|publish
  auto* manifest_cmd = app.add_subcommand("manifest", "Validate or publish manifests");
  manifest_cmd->require_subcommand(1);
  std::string m_file;
  auto* m_validate = manifest_cmd->add_subcommand("validate", "Check a manifest file locally");
  m_validate->add_option("file", m_file, "Manifest file")->required();
  auto* m_publish = manifest_cmd->add_subcommand("publish", "Store a manifest in the registry");
  m_publish->add_option("file", m_file, "Manifest file")->required();

  auto* models_cmd = app.add_subcommand("models", "List published manifests");
  std::string models_name;
  models_cmd->add_option("--name", models_name, "Name glob");
  auto* agents_cmd = app.add_subcommand("agents", "List live agents");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Submit an evaluation");
  std::string e_model, e_model_version, e_manifest_file, e_key, e_framework = "", e_fw_constraint,
                                                                e_arch, e_accel, e_trace, e_dataset,
                                                                e_dispatch = "one";
  std::vector<std::string> e_inputs, e_files, e_labels;
  std::vector<std::int64_t> e_batches{1};
  double e_min_memory = 0;
  std::size_t e_top_k = 5;
  std::int64_t e_wait_ms = 120'000;
  eval_cmd->add_option("--model", e_model, "Model name of a published manifest");
  eval_cmd->add_option("--model-version", e_model_version, "Model version constraint");
  eval_cmd->add_option("--manifest", e_manifest_file, "Manifest file sent inline");
  eval_cmd->add_option("--manifest-key", e_key, "Key of a published manifest");
  eval_cmd->add_option("--framework", e_framework, "Framework name override");
  eval_cmd->add_option("--framework-constraint", e_fw_constraint, "Framework version constraint");
  eval_cmd->add_option("--arch", e_arch, "Required architecture");
  eval_cmd->add_option("--accelerator", e_accel, "Required accelerator");
  eval_cmd->add_option("--min-memory-gb", e_min_memory, "Required memory");
  eval_cmd->add_option("--label", e_labels, "Required hardware label key=value");
  eval_cmd->add_option("--batch-sizes", e_batches, "Batch sizes, ascending")->delimiter(',');
  eval_cmd->add_option("--trace-level", e_trace, "model, framework, layer, library or hardware");
  eval_cmd->add_option("--dispatch", e_dispatch, "one or all")
      ->check(CLI::IsMember({"one", "all"}, CLI::ignore_case));
  eval_cmd->add_option("--input", e_inputs, "Local input file, uploaded inline");
  eval_cmd->add_option("--file", e_files, "Input path or URL readable by the agents");
  eval_cmd->add_option("--dataset", e_dataset, "URL of a newline-separated input URL list");
  eval_cmd->add_option("--top-k", e_top_k, "Predictions kept per input");
  eval_cmd->add_option("--wait-ms", e_wait_ms, "How long to wait for results (0: do not wait)");

  // results list|show
  auto* results_cmd = app.add_subcommand("results", "Query evaluation history");
  results_cmd->require_subcommand(1);
  auto* r_list = results_cmd->add_subcommand("list", "List stored results");
  std::map<std::string, std::string> r_filters;
  for (const char* key : {"model", "model_version", "framework", "framework_version", "arch",
                          "accelerator", "agent", "status", "batch_size", "evaluation"}) {
    std::string flag = std::string("--") + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    r_list->add_option_function<std::string>(
        flag, [&r_filters, key](const std::string& v) { r_filters[key] = v; }, "Filter");
  }
  auto* r_show = results_cmd->add_subcommand("show", "Show one evaluation");
  std::string r_id;
  r_show->add_option("id", r_id, "Evaluation id")->required();

  auto* sum_cmd = app.add_subcommand("summarize", "Latency, throughput and cost of an evaluation");
  std::string s_id, s_prices;
  sum_cmd->add_option("id", s_id, "Evaluation id")->required();
  sum_cmd->add_option("--prices", s_prices, "JSON price table, dollars per hour");

  auto* trace_cmd = app.add_subcommand("trace", "Inspect traces");
  trace_cmd->require_subcommand(1);
  auto* t_show = trace_cmd->add_subcommand("show", "Show a trace tree");
  std::string t_id;
  bool t_flat = false;
  t_show->add_option("id", t_id, "Trace id")->required();
  t_show->add_flag("--flat", t_flat, "Flattened span list");

  auto* cmp_cmd = app.add_subcommand("compare", "Compare top-1 predictions of two evaluations");
  std::string c_a, c_b;
  cmp_cmd->add_option("a", c_a, "First evaluation id")->required();
  cmp_cmd->add_option("b", c_b, "Second evaluation id")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUser;
  }

  auto emit = [&](const json& j, auto&& human) {
    if (as_json) {
      out << j.dump(2) << "\n";
    } else {
      human(j);
    }
  };

  try {
    if (*m_validate) {
      const auto report = manifest::validate_document(read_text(m_file));
      json issues = json::array();
      for (const auto& i : report.issues) {
        issues.push_back(
            {{"severity", manifest::to_string(i.severity)}, {"field", i.field}, {"message", i.message}});
      }
      const bool valid = !report.has_errors();
      emit({{"file", m_file}, {"valid", valid}, {"issues", issues}}, [&](const json&) {
        if (!report.empty()) out << report.to_text();
        out << (valid ? "valid" : "invalid") << "\n";
      });
      return valid ? kExitOk : kExitUser;
    }

    if (*orch_serve) {
      orchestrator::OrchestratorServer::Options o;
      o.host = o_host;
      o.wire_port = o_wire_port;
      o.rest_port = o_rest_port;
      o.orchestrator.job_timeout = std::chrono::milliseconds(o_job_timeout_ms);
      if (!o_prices.empty()) o.prices = orchestrator::parse_price_table(read_json_file(o_prices));
      std::shared_ptr<orchestrator::ResultStore> store;
      if (o_history.empty()) {
        store = std::make_shared<orchestrator::InMemoryResultStore>();
      } else {
        store = std::make_shared<orchestrator::JsonlResultStore>(o_history);
      }
      orchestrator::OrchestratorServer server(std::make_shared<registry::InMemoryRegistry>(),
                                              store, o);
      g_stop = false;
      server.start();
      const json ready = {{"wire", server.wire_address()}, {"rest", server.rest_url()}};
      emit(ready, [&](const json&) {
        out << "orchestrator wire " << server.wire_address() << " rest " << server.rest_url()
            << "\n";
      });
      out.flush();
      write_ready_file(o_ready, ready);
      wait_for_stop();
      server.stop();
      return kExitOk;
    }

    if (*agent_serve) {
      agent::AgentConfig cfg;
      cfg.agent_id = a_id;
      cfg.listen = wire::parse_endpoint(a_listen);
      cfg.advertise_host = a_advertise;
      cfg.orchestrator = wire::parse_endpoint(a_registry);
      cfg.hardware.arch = arch_option(a_arch);
      cfg.hardware.accelerator = accelerator_option(a_accel);
      cfg.hardware.memory_gb = a_memory;
      cfg.hardware.labels = label_options(a_labels);
      cfg.cache_dir = a_cache.empty()
                          ? (std::filesystem::temp_directory_path() / ("evalmesh-cache-" + a_id)).string()
                          : a_cache;
      cfg.heartbeat_ms = a_heartbeat;
      cfg.ttl_ms = a_ttl;
      cfg.parallelism = a_parallelism;
      cfg.manifests = load_manifests(a_manifests);
      std::vector<manifest::SemVer> versions;
      for (const auto& v : a_versions) versions.push_back(manifest::SemVer::parse(v));
      auto predictors = std::make_shared<predictor::PredictorRegistry>();
      predictor::register_reference_predictors(*predictors, versions,
                                               cfg.hardware.accelerator == Accelerator::kGpu);
      agent::Agent agent(cfg, {predictors});
      g_stop = false;
      agent.start();
      const json ready = {{"agent_id", a_id}, {"address", agent.endpoint().to_string()}};
      emit(ready, [&](const json&) {
        out << "agent " << a_id << " serving on " << agent.endpoint().to_string() << "\n";
      });
      out.flush();
      write_ready_file(a_ready, ready);
      wait_for_stop();
      agent.drain(std::chrono::seconds(10));
      agent.stop();
      return kExitOk;
    }

    std::map<std::string, std::string> env;
    for (const char* k : {kAddressEnv, kConfigEnv, "HOME"}) {
      if (const char* v = std::getenv(k)) env[k] = v;
    }
    RestClient rest(resolve_address(
        {orchestrator_flag.empty() ? std::nullopt : std::optional(orchestrator_flag),
         config_path.empty() ? std::nullopt : std::optional(config_path), env}));

    if (*m_publish) {
      const auto reply = rest.post("/manifests", read_text(m_file), "text/yaml");
      emit(reply, [&](const json& j) { out << "published " << j.at("key").get<std::string>() << "\n"; });
      return kExitOk;
    }

    if (*models_cmd) {
      const auto reply =
          rest.get("/models" + query_string(models_name.empty()
                                                ? std::vector<std::pair<std::string, std::string>>{}
                                                : std::vector<std::pair<std::string, std::string>>{
                                                      {"name", models_name}}));
      emit(reply, [&](const json& j) {
        for (const auto& m : j.at("models")) out << m.at("key").get<std::string>() << "\n";
      });
      return kExitOk;
    }

    if (*agents_cmd) {
      const auto reply = rest.get("/agents");
      emit(reply, [&](const json& j) {
        for (const auto& a : j.at("agents")) {
          const auto rec = registry::agent_from_json(a);
          out << std::left << std::setw(16) << rec.agent_id << std::setw(22) << rec.address
              << to_string(rec.hardware.arch) << "/" << to_string(rec.hardware.accelerator);
          for (const auto& fw : rec.frameworks) out << " " << fw.name << "@" << fw.version.to_string();
          out << "\n";
        }
      });
      return kExitOk;
    }

    if (*eval_cmd) {
      orchestrator::EvaluationRequest req;
      req.model_name = e_model;
      if (!e_model_version.empty()) req.model_version = constraint_option(e_model_version, "model_version");
      if (!e_manifest_file.empty()) req.manifest = load_manifests({e_manifest_file}).front();
      if (!e_key.empty()) req.manifest_key = e_key;
      if (!e_framework.empty() || !e_fw_constraint.empty()) {
        std::string name = e_framework;
        if (name.empty()) {
          if (req.manifest && req.manifest->framework) {
            name = req.manifest->framework->name;
          } else {
            throw user_error(ErrorCode::kInvalidArgument,
                             "--framework-constraint needs --framework or --manifest", "framework");
          }
        }
        req.framework = manifest::FrameworkSpec{name, std::nullopt};
        if (!e_fw_constraint.empty()) {
          req.framework->constraint = constraint_option(e_fw_constraint, "framework_constraint");
        }
      }
      if (!e_arch.empty()) req.hardware.arch = arch_option(e_arch);
      if (!e_accel.empty()) req.hardware.accelerator = accelerator_option(e_accel);
      if (e_min_memory > 0) req.hardware.min_memory_gb = e_min_memory;
      req.hardware.labels = label_options(e_labels);
      req.batch_sizes = e_batches;
      if (!e_trace.empty()) {
        req.trace_level = tracer::parse_trace_level(e_trace);
        if (!req.trace_level) {
          throw user_error(ErrorCode::kInvalidArgument, "unknown trace level " + e_trace,
                           "trace_level");
        }
      }
      req.dispatch = iequals(e_dispatch, "all") ? orchestrator::Dispatch::kAll
                                                : orchestrator::Dispatch::kOne;
      for (const auto& path : e_inputs) {
        const auto text = read_text(path);
        req.inputs.push_back({{text.begin(), text.end()},
                              std::nullopt,
                              std::filesystem::path(path).filename().string()});
      }
      req.files = e_files;
      if (!e_dataset.empty()) req.dataset = e_dataset;
      req.top_k = e_top_k;
      try {
        orchestrator::validate(req);
      } catch (const Error& e) {
        throw user_error(e.code(), e.what(), e.field());
      }
      auto view = rest.post("/evaluations", orchestrator::to_json(req).dump(), "application/json");
      const auto id = view.at("evaluation_id").get<std::string>();
      const auto deadline =
          std::chrono::steady_clock::now() + std::chrono::milliseconds(e_wait_ms);
      while (view.at("pending").get<std::size_t>() > 0 &&
             std::chrono::steady_clock::now() < deadline) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                              deadline - std::chrono::steady_clock::now())
                              .count();
        view = rest.get("/evaluations/" + encode_path(id) + "?wait_ms=" +
                        std::to_string(std::clamp<std::int64_t>(left, 1, 10'000)));
      }
      emit(view, [&](const json& j) { print_view(out, j); });
      if (view.at("pending").get<std::size_t>() > 0 && e_wait_ms > 0) return kExitInternal;
      return kExitOk;
    }

    if (*r_list) {
      std::vector<std::pair<std::string, std::string>> params(r_filters.begin(), r_filters.end());
      const auto reply = rest.get("/evaluations" + query_string(params));
      emit(reply, [&](const json& j) { print_results(out, j.at("results")); });
      return kExitOk;
    }

    if (*r_show) {
      const auto reply = rest.get("/evaluations/" + encode_path(r_id));
      emit(reply, [&](const json& j) { print_view(out, j); });
      return kExitOk;
    }

    if (*sum_cmd) {
      json body = {{"evaluation_id", s_id}};
      if (!s_prices.empty()) body["prices"] = read_json_file(s_prices);
      const auto reply = rest.post("/summaries", body.dump(), "application/json");
      emit(reply, [&](const json& j) { print_summaries(out, j.at("summaries")); });
      return kExitOk;
    }

    if (*t_show) {
      const auto reply =
          rest.get("/traces/" + encode_path(t_id) + (t_flat ? "?format=flat" : ""));
      emit(reply, [&](const json& j) {
        if (t_flat) {
          for (const auto& s : j.at("spans")) {
            const auto span = tracer::span_from_json(s);
            out << span.id << " " << span.parent << " " << tracer::to_string(span.level) << " "
                << span.name << " " << span.begin_us << " " << span.end_us << "\n";
          }
        } else {
          for (const auto& root : tracer::tree_from_json(j).roots) print_tree(out, root, 0);
        }
      });
      return kExitOk;
    }

    if (*cmp_cmd) {
      const auto reply = rest.get("/comparisons" + query_string({{"a", c_a}, {"b", c_b}}));
      emit(reply, [&](const json& j) { print_comparison(out, j); });
      return kExitOk;
    }
  } catch (const Failure& f) {
    if (as_json) {
      out << f.body.dump(2) << "\n";
    } else {
      const auto& e = f.body.contains("error") ? f.body["error"] : f.body;
      err << "error: " << e.value("code", std::string("Error")) << ": "
          << e.value("message", f.body.dump());
      if (e.contains("field")) err << " (" << e["field"].get<std::string>() << ")";
      err << "\n";
    }
    return f.exit_code;
  } catch (const Error& e) {
    const bool user = orchestrator::http_status(e.code()) < 500 ||
                      e.code() == ErrorCode::kBindFailure;
    if (as_json) {
      out << orchestrator::error_body(e).dump(2) << "\n";
    } else {
      err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    }
    return user ? kExitUser : kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  err << app.help();
  return kExitUser;
}

}  // namespace evalmesh::cli
