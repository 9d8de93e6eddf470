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

#include <functional>
#include <map>
#include <mutex>
#include <shared_mutex>

#include "evalmesh/registry/records.hpp"

namespace evalmesh::registry {

class RegistryStore {
 public:
  virtual ~RegistryStore() = default;

  // Stores or overwrites by agent_id; timestamps are stamped by the store.
  virtual void register_agent(AgentRecord rec) = 0;
  // Throws Error(kUnknownAgent).
  virtual void heartbeat(const std::string& agent_id) = 0;
  // Removes records past their ttl and returns their ids.
  virtual std::vector<std::string> expire() = 0;
  // Live matching agents ordered by agent_id.
  virtual std::vector<AgentRecord> resolve(const ResolutionQuery& q) = 0;
  virtual std::vector<AgentRecord> list_agents() = 0;

  // Throws Error(kDuplicateKey) when the key holds a different manifest.
  virtual std::string put_manifest(const manifest::Manifest& m) = 0;
  virtual std::vector<manifest::Manifest> find_manifests(const ManifestFilter& f) = 0;
};

class InMemoryRegistry final : public RegistryStore {
 public:
  using NowFn = std::function<std::int64_t()>;

  InMemoryRegistry();
  explicit InMemoryRegistry(NowFn now_ms);

  void register_agent(AgentRecord rec) override;
  void heartbeat(const std::string& agent_id) override;
  std::vector<std::string> expire() override;
  std::vector<AgentRecord> resolve(const ResolutionQuery& q) override;
  std::vector<AgentRecord> list_agents() override;
  std::string put_manifest(const manifest::Manifest& m) override;
  std::vector<manifest::Manifest> find_manifests(const ManifestFilter& f) override;

 private:
  NowFn now_ms_;
  std::shared_mutex mu_;
  std::map<std::string, AgentRecord> agents_;
  std::map<std::string, manifest::Manifest> manifests_;
};

}  // namespace evalmesh::registry
