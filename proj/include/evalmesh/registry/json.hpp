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

#include <json.hpp>

#include "evalmesh/registry/records.hpp"

namespace evalmesh::registry {

nlohmann::json to_json(const HardwareDescriptor& hw);
HardwareDescriptor hardware_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AgentRecord& rec);
AgentRecord agent_from_json(const nlohmann::json& j);

nlohmann::json to_json(const HardwareConstraint& c);
HardwareConstraint hardware_constraint_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ResolutionQuery& q);
ResolutionQuery query_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ManifestFilter& f);
ManifestFilter manifest_filter_from_json(const nlohmann::json& j);

// Manifests travel as their YAML rendering.
nlohmann::json manifest_to_json(const manifest::Manifest& m);
manifest::Manifest manifest_from_json(const nlohmann::json& j);

}  // namespace evalmesh::registry
