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

#include "evalmesh/registry/records.hpp"

#include "evalmesh/common/strings.hpp"

namespace evalmesh::registry {

bool is_live(const AgentRecord& rec, std::int64_t now_ms) {
  return now_ms - rec.last_heartbeat_ms <= rec.ttl_ms;
}

bool satisfies_framework(const AgentRecord& rec, const manifest::FrameworkSpec& spec) {
  for (const auto& fw : rec.frameworks) {
    if (iequals(fw.name, spec.name) && (!spec.constraint || spec.constraint->matches(fw.version))) {
      return true;
    }
  }
  return false;
}

bool satisfies_hardware(const HardwareDescriptor& hw, const HardwareConstraint& c) {
  if (c.arch && *c.arch != hw.arch) return false;
  if (c.accelerator && *c.accelerator != hw.accelerator) return false;
  if (c.min_memory_gb && hw.memory_gb < *c.min_memory_gb) return false;
  for (const auto& [k, v] : c.labels) {
    const auto it = hw.labels.find(k);
    if (it == hw.labels.end() || it->second != v) return false;
  }
  return true;
}

bool satisfies(const AgentRecord& rec, const ResolutionQuery& q) {
  if (q.framework && !satisfies_framework(rec, *q.framework)) return false;
  return satisfies_hardware(rec.hardware, q.hardware);
}

bool glob_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (p < pattern.size() && lower(pattern[p]) == lower(text[t])) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

bool matches(const manifest::Manifest& m, const ManifestFilter& f) {
  if (f.name && !glob_match(*f.name, m.name)) return false;
  if (f.version && (!m.version || !f.version->matches(*m.version))) return false;
  if (f.framework && (!m.framework || !iequals(m.framework->name, *f.framework))) return false;
  return true;
}

}  // namespace evalmesh::registry
