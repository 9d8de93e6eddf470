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

enum class Severity { kError, kWarning };
std::string_view to_string(Severity s);

struct ValidationIssue {
  Severity severity = Severity::kError;
  std::string field;
  std::string message;
  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool empty() const { return issues.empty(); }
  bool has_errors() const;
  std::size_t error_count() const;
  // One "SEVERITY field: message" line per issue.
  std::string to_text() const;
};

// Reports every invariant violation of a parsed manifest (errors only).
ValidationReport validate_manifest(const Manifest& m);

// Parses and validates a document. Parse failures become a single ERROR
// entry at the failing field; unknown top-level keys, embedded scripts and
// other non-fatal notes are WARNINGs.
ValidationReport validate_document(std::string_view text);

}  // namespace evalmesh::manifest
