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
#include <string_view>
#include <vector>

namespace evalmesh::tracer {

// Abstraction levels, shallow to deep. A granularity g admits levels <= g.
enum class TraceLevel : int {
  kModel = 1,
  kFramework = 2,
  kLayer = 3,
  kLibrary = 4,
  kHardware = 5,
};

std::string_view to_string(TraceLevel level);
std::optional<TraceLevel> parse_trace_level(std::string_view s);

using SpanId = std::uint64_t;
inline constexpr SpanId kNullSpan = 0;

struct Span {
  SpanId id = kNullSpan;
  SpanId parent = kNullSpan;
  std::string trace_id;
  TraceLevel level = TraceLevel::kModel;
  std::string name;
  std::int64_t begin_us = 0;
  std::int64_t end_us = 0;
  std::map<std::string, std::string> tags;

  std::int64_t duration_us() const { return end_us - begin_us; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct SpanNode {
  Span span;
  std::vector<SpanNode> children;
};

struct TraceTree {
  std::string trace_id;
  std::vector<SpanNode> roots;

  std::size_t span_count() const;
  std::size_t depth() const;
};

// Builds the tree from completed spans: parentless spans (or spans whose
// parent is absent) are roots, siblings ordered by (begin, id).
TraceTree build_tree(const std::string& trace_id, std::vector<Span> spans);
std::vector<Span> flatten(const TraceTree& tree);

// Containment, level nesting, end >= begin and "children do not overrun the
// parent" checks. Returns one message per violation.
std::vector<std::string> check_invariants(const TraceTree& tree);

struct LayerStat {
  std::string name;
  std::size_t count = 0;
  double mean_us = 0.0;
  std::int64_t min_us = 0;
  std::int64_t max_us = 0;
};

// Per-name duration statistics of the spans at `level`, names ascending.
std::vector<LayerStat> aggregate_layers(const std::vector<TraceTree>& traces,
                                        TraceLevel level);

}  // namespace evalmesh::tracer
