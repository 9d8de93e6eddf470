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

#include <optional>

#include <json.hpp>

#include "evalmesh/registry/store.hpp"
#include "evalmesh/wire/transport.hpp"

namespace evalmesh::wire {

// Serves the registry messages against `store`. Returns nullopt for
// message types it does not own.
std::optional<nlohmann::json> handle_registry_rpc(registry::RegistryStore& store,
                                                  const std::string& type,
                                                  const nlohmann::json& body);

// RegistryStore backed by the orchestrator-hosted registry.
class RemoteRegistry final : public registry::RegistryStore {
 public:
  explicit RemoteRegistry(Endpoint ep, std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : client_(std::move(ep), timeout) {}

  void register_agent(registry::AgentRecord rec) override;
  void heartbeat(const std::string& agent_id) override;
  std::vector<std::string> expire() override;
  std::vector<registry::AgentRecord> resolve(const registry::ResolutionQuery& q) override;
  std::vector<registry::AgentRecord> list_agents() override;
  std::string put_manifest(const manifest::Manifest& m) override;
  std::vector<manifest::Manifest> find_manifests(const registry::ManifestFilter& f) override;

 private:
  WireClient client_;
};

}  // namespace evalmesh::wire
