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

#include "evalmesh/wire/registry_rpc.hpp"

#include "evalmesh/common/error.hpp"
#include "evalmesh/registry/json.hpp"
#include "evalmesh/wire/messages.hpp"

namespace evalmesh::wire {

using nlohmann::json;
namespace reg = registry;

namespace {

json agents_json(const std::vector<reg::AgentRecord>& recs) {
  json arr = json::array();
  for (const auto& r : recs) arr.push_back(reg::to_json(r));
  return arr;
}

std::vector<reg::AgentRecord> agents_from(const json& j) {
  std::vector<reg::AgentRecord> out;
  for (const auto& r : j.at("agents")) out.push_back(reg::agent_from_json(r));
  return out;
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw Error(ErrorCode::kProtocolError, std::string("missing ") + key, key);
  }
  return body[key].get<std::string>();
}

}  // namespace

std::optional<json> handle_registry_rpc(reg::RegistryStore& store, const std::string& type,
                                        const json& body) {
  if (type == msg::kRegisterAgent) {
    store.register_agent(reg::agent_from_json(body.at("agent")));
    return json::object();
  }
  if (type == msg::kHeartbeat) {
    store.heartbeat(required_string(body, "agent_id"));
    return json::object();
  }
  if (type == msg::kResolve) {
    return json{{"agents", agents_json(store.resolve(reg::query_from_json(body.at("query"))))}};
  }
  if (type == msg::kListAgents) {
    return json{{"agents", agents_json(store.list_agents())}};
  }
  if (type == msg::kPutManifest) {
    return json{{"key", store.put_manifest(reg::manifest_from_json(body.at("manifest")))}};
  }
  if (type == msg::kFindManifests) {
    json arr = json::array();
    for (const auto& m : store.find_manifests(reg::manifest_filter_from_json(body.at("filter")))) {
      arr.push_back(reg::manifest_to_json(m));
    }
    return json{{"manifests", arr}};
  }
  return std::nullopt;
}

void RemoteRegistry::register_agent(reg::AgentRecord rec) {
  client_.call(msg::kRegisterAgent, {{"agent", reg::to_json(rec)}});
}

void RemoteRegistry::heartbeat(const std::string& agent_id) {
  client_.call(msg::kHeartbeat, {{"agent_id", agent_id}});
}

// Expiry runs inside the hosting process.
std::vector<std::string> RemoteRegistry::expire() { return {}; }

std::vector<reg::AgentRecord> RemoteRegistry::resolve(const reg::ResolutionQuery& q) {
  return agents_from(client_.call(msg::kResolve, {{"query", reg::to_json(q)}}));
}

std::vector<reg::AgentRecord> RemoteRegistry::list_agents() {
  return agents_from(client_.call(msg::kListAgents, json::object()));
}

std::string RemoteRegistry::put_manifest(const manifest::Manifest& m) {
  return client_.call(msg::kPutManifest, {{"manifest", reg::manifest_to_json(m)}})
      .at("key")
      .get<std::string>();
}

std::vector<manifest::Manifest> RemoteRegistry::find_manifests(const reg::ManifestFilter& f) {
  const auto reply = client_.call(msg::kFindManifests, {{"filter", reg::to_json(f)}});
  std::vector<manifest::Manifest> out;
  for (const auto& m : reply.at("manifests")) {
    out.push_back(reg::manifest_from_json(m));
  }
  return out;
}

}  // namespace evalmesh::wire
