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

#include <string>
#include <string_view>
#include <vector>

#include "evalmesh/manifest/manifest.hpp"

namespace evalmesh::manifest {

struct ParseOutcome {
  Manifest manifest;
  // Top-level keys outside the known schema; their values land in
  // `manifest.attributes`.
  std::vector<std::string> unknown_keys;
};

// Throws Error(kSyntaxError) for malformed YAML and Error(kSchemaError) when a
// known field has the wrong shape. Error::field() names the offending path,
// e.g. "inputs[0].steps.crop.percentage".
Manifest parse_manifest(std::string_view text);
ParseOutcome parse_manifest_detailed(std::string_view text);

// Canonical YAML rendering; parse_manifest(render_manifest(m)) == m.
std::string render_manifest(const Manifest& m);

}  // namespace evalmesh::manifest
