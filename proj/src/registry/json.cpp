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

#include "evalmesh/registry/json.hpp"

#include "evalmesh/common/error.hpp"
#include "evalmesh/manifest/document.hpp"

namespace evalmesh::registry {

using nlohmann::json;

namespace {

template <typename T, typename Parse>
T parse_enum(const json& j, const char* field, Parse parse) {
  if (!j.is_string()) throw Error(ErrorCode::kInvalidArgument, "expected a string", field);
  const auto v = parse(j.get<std::string>());
  if (!v) {
    throw Error(ErrorCode::kInvalidArgument, "unknown value " + j.dump(), field);
  }
  return *v;
}

template <typename Fn>
auto guarded(const char* what, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad ") + what + ": " + e.what());
  }
}

json framework_spec_json(const manifest::FrameworkSpec& spec) {
  json j = {{"name", spec.name}};
  if (spec.constraint) j["version"] = spec.constraint->raw();
  return j;
}

manifest::FrameworkSpec framework_spec_from(const json& j) {
  manifest::FrameworkSpec spec{j.at("name").get<std::string>(), std::nullopt};
  if (j.contains("version") && !j["version"].is_null()) {
    spec.constraint = manifest::VersionConstraint::parse(j["version"].get<std::string>());
  }
  return spec;
}

}  // namespace

json to_json(const HardwareDescriptor& hw) {
  json j = {{"arch", to_string(hw.arch)},
            {"accelerator", to_string(hw.accelerator)},
            {"memory_gb", hw.memory_gb},
            {"labels", hw.labels}};
  if (hw.interconnect) j["interconnect"] = *hw.interconnect;
  return j;
}

HardwareDescriptor hardware_from_json(const json& j) {
  return guarded("hardware", [&] {
    HardwareDescriptor hw;
    hw.arch = parse_enum<Architecture>(j.at("arch"), "hardware.arch", parse_architecture);
    hw.accelerator =
        parse_enum<Accelerator>(j.at("accelerator"), "hardware.accelerator", parse_accelerator);
    hw.memory_gb = j.value("memory_gb", 0.0);
    if (j.contains("interconnect") && !j["interconnect"].is_null()) {
      hw.interconnect = j["interconnect"].get<std::string>();
    }
    if (j.contains("labels")) hw.labels = j["labels"].get<std::map<std::string, std::string>>();
    return hw;
  });
}

json to_json(const AgentRecord& rec) {
  json fws = json::array();
  for (const auto& fw : rec.frameworks) {
    fws.push_back({{"name", fw.name}, {"version", fw.version.to_string()}});
  }
  return {{"agent_id", rec.agent_id},
          {"address", rec.address},
          {"hardware", to_json(rec.hardware)},
          {"frameworks", fws},
          {"registered_at_ms", rec.registered_at_ms},
          {"last_heartbeat_ms", rec.last_heartbeat_ms},
          {"ttl_ms", rec.ttl_ms}};
}

AgentRecord agent_from_json(const json& j) {
  return guarded("agent record", [&] {
    AgentRecord rec;
    rec.agent_id = j.at("agent_id").get<std::string>();
    if (rec.agent_id.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "agent_id must not be empty", "agent_id");
    }
    rec.address = j.value("address", std::string());
    rec.hardware = hardware_from_json(j.at("hardware"));
    for (const auto& fw : j.value("frameworks", json::array())) {
      rec.frameworks.push_back({fw.at("name").get<std::string>(),
                                manifest::SemVer::parse(fw.at("version").get<std::string>())});
    }
    rec.registered_at_ms = j.value("registered_at_ms", std::int64_t{0});
    rec.last_heartbeat_ms = j.value("last_heartbeat_ms", std::int64_t{0});
    rec.ttl_ms = j.value("ttl_ms", kDefaultTtlMs);
    return rec;
  });
}

json to_json(const HardwareConstraint& c) {
  json j = json::object();
  if (c.arch) j["arch"] = to_string(*c.arch);
  if (c.accelerator) j["accelerator"] = to_string(*c.accelerator);
  if (c.min_memory_gb) j["min_memory_gb"] = *c.min_memory_gb;
  if (!c.labels.empty()) j["labels"] = c.labels;
  return j;
}

HardwareConstraint hardware_constraint_from_json(const json& j) {
  return guarded("hardware constraint", [&] {
    HardwareConstraint c;
    if (j.contains("arch") && !j["arch"].is_null()) {
      c.arch = parse_enum<Architecture>(j["arch"], "hardware.arch", parse_architecture);
    }
    if (j.contains("accelerator") && !j["accelerator"].is_null()) {
      c.accelerator =
          parse_enum<Accelerator>(j["accelerator"], "hardware.accelerator", parse_accelerator);
    }
    if (j.contains("min_memory_gb") && !j["min_memory_gb"].is_null()) {
      c.min_memory_gb = j["min_memory_gb"].get<double>();
    }
    if (j.contains("labels")) c.labels = j["labels"].get<std::map<std::string, std::string>>();
    return c;
  });
}

json to_json(const ResolutionQuery& q) {
  json j = {{"model", q.model_name}, {"hardware", to_json(q.hardware)}};
  if (q.model_version) j["model_version"] = q.model_version->raw();
  if (q.framework) j["framework"] = framework_spec_json(*q.framework);
  return j;
}

ResolutionQuery query_from_json(const json& j) {
  return guarded("query", [&] {
    ResolutionQuery q;
    q.model_name = j.value("model", std::string());
    if (j.contains("model_version") && !j["model_version"].is_null()) {
      q.model_version = manifest::VersionConstraint::parse(j["model_version"].get<std::string>());
    }
    if (j.contains("framework") && !j["framework"].is_null()) {
      q.framework = framework_spec_from(j["framework"]);
    }
    if (j.contains("hardware")) q.hardware = hardware_constraint_from_json(j["hardware"]);
    return q;
  });
}

json to_json(const ManifestFilter& f) {
  json j = json::object();
  if (f.name) j["name"] = *f.name;
  if (f.version) j["version"] = f.version->raw();
  if (f.framework) j["framework"] = *f.framework;
  return j;
}

ManifestFilter manifest_filter_from_json(const json& j) {
  return guarded("manifest filter", [&] {
    ManifestFilter f;
    if (j.contains("name") && !j["name"].is_null()) f.name = j["name"].get<std::string>();
    if (j.contains("version") && !j["version"].is_null()) {
      f.version = manifest::VersionConstraint::parse(j["version"].get<std::string>());
    }
    if (j.contains("framework") && !j["framework"].is_null()) {
      f.framework = j["framework"].get<std::string>();
    }
    return f;
  });
}

json manifest_to_json(const manifest::Manifest& m) { return manifest::render_manifest(m); }

manifest::Manifest manifest_from_json(const json& j) {
  if (!j.is_string()) {
    throw Error(ErrorCode::kInvalidArgument, "manifest must be YAML text", "manifest");
  }
  return manifest::parse_manifest(j.get<std::string>());
}

}  // namespace evalmesh::registry
