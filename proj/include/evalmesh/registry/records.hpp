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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evalmesh/common/enums.hpp"
#include "evalmesh/manifest/manifest.hpp"
#include "evalmesh/manifest/semver.hpp"

namespace evalmesh::registry {

inline constexpr std::int64_t kDefaultTtlMs = 30'000;
inline constexpr std::int64_t kDefaultHeartbeatMs = 10'000;

struct HardwareDescriptor {
  Architecture arch = Architecture::kAmd64;
  Accelerator accelerator = Accelerator::kCpu;
  double memory_gb = 0.0;
  std::optional<std::string> interconnect;
  std::map<std::string, std::string> labels;
  friend bool operator==(const HardwareDescriptor&, const HardwareDescriptor&) = default;
};

struct FrameworkVersion {
  std::string name;
  manifest::SemVer version;
  friend bool operator==(const FrameworkVersion&, const FrameworkVersion&) = default;
};

struct AgentRecord {
  std::string agent_id;
  std::string address;  // host:port
  HardwareDescriptor hardware;
  std::vector<FrameworkVersion> frameworks;
  std::int64_t registered_at_ms = 0;
  std::int64_t last_heartbeat_ms = 0;
  std::int64_t ttl_ms = kDefaultTtlMs;
  friend bool operator==(const AgentRecord&, const AgentRecord&) = default;
};

struct HardwareConstraint {
  std::optional<Architecture> arch;
  std::optional<Accelerator> accelerator;
  std::optional<double> min_memory_gb;
  std::map<std::string, std::string> labels;
  friend bool operator==(const HardwareConstraint&, const HardwareConstraint&) = default;
};

// The model fields pick the manifest; agent matching uses the framework and
// hardware fields only.
struct ResolutionQuery {
  std::string model_name;
  std::optional<manifest::VersionConstraint> model_version;
  std::optional<manifest::FrameworkSpec> framework;
  HardwareConstraint hardware;
  friend bool operator==(const ResolutionQuery&, const ResolutionQuery&) = default;
};

bool is_live(const AgentRecord& rec, std::int64_t now_ms);
bool satisfies_framework(const AgentRecord& rec, const manifest::FrameworkSpec& spec);
bool satisfies_hardware(const HardwareDescriptor& hw, const HardwareConstraint& c);
bool satisfies(const AgentRecord& rec, const ResolutionQuery& q);

struct ManifestFilter {
  // Case-insensitive; '*' matches any run of characters.
  std::optional<std::string> name;
  std::optional<manifest::VersionConstraint> version;
  std::optional<std::string> framework;
};

bool glob_match(std::string_view pattern, std::string_view text);
bool matches(const manifest::Manifest& m, const ManifestFilter& f);

}  // namespace evalmesh::registry
