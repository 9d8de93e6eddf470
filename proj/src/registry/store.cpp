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

#include "evalmesh/registry/store.hpp"

#include "evalmesh/common/clock.hpp"
#include "evalmesh/common/error.hpp"
#include "evalmesh/manifest/selection.hpp"

namespace evalmesh::registry {

InMemoryRegistry::InMemoryRegistry() : InMemoryRegistry(wall_clock_ms) {}

InMemoryRegistry::InMemoryRegistry(NowFn now_ms) : now_ms_(std::move(now_ms)) {}

void InMemoryRegistry::register_agent(AgentRecord rec) {
  const auto now = now_ms_();
  rec.registered_at_ms = now;
  rec.last_heartbeat_ms = now;
  if (rec.ttl_ms <= 0) rec.ttl_ms = kDefaultTtlMs;
  std::unique_lock lock(mu_);
  agents_[rec.agent_id] = std::move(rec);
}

void InMemoryRegistry::heartbeat(const std::string& agent_id) {
  const auto now = now_ms_();
  std::unique_lock lock(mu_);
  const auto it = agents_.find(agent_id);
  if (it == agents_.end()) {
    throw Error(ErrorCode::kUnknownAgent, "agent " + agent_id + " is not registered");
  }
  it->second.last_heartbeat_ms = now;
}

std::vector<std::string> InMemoryRegistry::expire() {
  const auto now = now_ms_();
  std::vector<std::string> removed;
  std::unique_lock lock(mu_);
  for (auto it = agents_.begin(); it != agents_.end();) {
    if (!is_live(it->second, now)) {
      removed.push_back(it->first);
      it = agents_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

std::vector<AgentRecord> InMemoryRegistry::resolve(const ResolutionQuery& q) {
  const auto now = now_ms_();
  std::shared_lock lock(mu_);
  std::vector<AgentRecord> out;
  for (const auto& [id, rec] : agents_) {
    if (is_live(rec, now) && satisfies(rec, q)) out.push_back(rec);
  }
  return out;
}

std::vector<AgentRecord> InMemoryRegistry::list_agents() {
  const auto now = now_ms_();
  std::shared_lock lock(mu_);
  std::vector<AgentRecord> out;
  for (const auto& [id, rec] : agents_) {
    if (is_live(rec, now)) out.push_back(rec);
  }
  return out;
}

std::string InMemoryRegistry::put_manifest(const manifest::Manifest& m) {
  auto key = manifest::manifest_key(m);
  std::unique_lock lock(mu_);
  const auto [it, inserted] = manifests_.try_emplace(key, m);
  if (!inserted && !(it->second == m)) {
    throw Error(ErrorCode::kDuplicateKey, "a different manifest is stored under " + key);
  }
  return key;
}

std::vector<manifest::Manifest> InMemoryRegistry::find_manifests(const ManifestFilter& f) {
  std::shared_lock lock(mu_);
  std::vector<manifest::Manifest> out;
  for (const auto& [key, m] : manifests_) {
    if (matches(m, f)) out.push_back(m);
  }
  return out;
}

}  // namespace evalmesh::registry
