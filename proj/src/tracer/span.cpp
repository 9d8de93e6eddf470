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

#include "evalmesh/tracer/span.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "evalmesh/common/strings.hpp"

namespace evalmesh::tracer {

std::string_view to_string(TraceLevel level) {
  switch (level) {
    case TraceLevel::kModel:
      return "MODEL";
    case TraceLevel::kFramework:
      return "FRAMEWORK";
    case TraceLevel::kLayer:
      return "LAYER";
    case TraceLevel::kLibrary:
      return "LIBRARY";
    case TraceLevel::kHardware:
      return "HARDWARE";
  }
  return "MODEL";
}

std::optional<TraceLevel> parse_trace_level(std::string_view s) {
  auto v = to_lower(s);
  if (v == "model" || v == "l1") return TraceLevel::kModel;
  if (v == "framework" || v == "l2") return TraceLevel::kFramework;
  if (v == "layer" || v == "l3") return TraceLevel::kLayer;
  if (v == "library" || v == "l4") return TraceLevel::kLibrary;
  if (v == "hardware" || v == "l5") return TraceLevel::kHardware;
  return std::nullopt;
}

namespace {

std::size_t count_nodes(const std::vector<SpanNode>& nodes) {
  std::size_t n = 0;
  for (const auto& node : nodes) n += 1 + count_nodes(node.children);
  return n;
}

std::size_t max_depth(const std::vector<SpanNode>& nodes) {
  std::size_t d = 0;
  for (const auto& node : nodes) d = std::max(d, 1 + max_depth(node.children));
  return d;
}

void sort_siblings(std::vector<SpanNode>& nodes) {
  std::sort(nodes.begin(), nodes.end(), [](const SpanNode& a, const SpanNode& b) {
    if (a.span.begin_us != b.span.begin_us) return a.span.begin_us < b.span.begin_us;
    return a.span.id < b.span.id;
  });
  for (auto& n : nodes) sort_siblings(n.children);
}

SpanNode attach(const Span& span,
                std::unordered_map<SpanId, std::vector<const Span*>>& children) {
  SpanNode node{span, {}};
  for (const Span* child : children[span.id]) {
    node.children.push_back(attach(*child, children));
  }
  return node;
}

void flatten_into(const std::vector<SpanNode>& nodes, std::vector<Span>& out) {
  for (const auto& n : nodes) {
    out.push_back(n.span);
    flatten_into(n.children, out);
  }
}

void check_node(const SpanNode& node, std::vector<std::string>& out) {
  const Span& p = node.span;
  if (p.end_us < p.begin_us) {
    out.push_back("span " + p.name + " ends before it begins");
  }
  std::int64_t child_total = 0;
  for (const auto& c : node.children) {
    const Span& s = c.span;
    if (s.begin_us < p.begin_us || s.end_us > p.end_us) {
      out.push_back("span " + s.name + " escapes parent " + p.name);
    }
    if (s.level < p.level) {
      out.push_back("span " + s.name + " is shallower than parent " + p.name);
    }
    child_total += s.duration_us();
    check_node(c, out);
  }
  if (child_total > p.duration_us()) {
    out.push_back("children of " + p.name + " overrun its duration");
  }
}

}  // namespace

std::size_t TraceTree::span_count() const { return count_nodes(roots); }
std::size_t TraceTree::depth() const { return max_depth(roots); }

TraceTree build_tree(const std::string& trace_id, std::vector<Span> spans) {
  std::unordered_map<SpanId, const Span*> by_id;
  for (const auto& s : spans) by_id[s.id] = &s;
  std::unordered_map<SpanId, std::vector<const Span*>> children;
  std::vector<const Span*> roots;
  for (const auto& s : spans) {
    if (s.parent != kNullSpan && by_id.contains(s.parent)) {
      children[s.parent].push_back(&s);
    } else {
      roots.push_back(&s);
    }
  }
  TraceTree tree{trace_id, {}};
  for (const Span* r : roots) tree.roots.push_back(attach(*r, children));
  sort_siblings(tree.roots);
  return tree;
}

std::vector<Span> flatten(const TraceTree& tree) {
  std::vector<Span> out;
  flatten_into(tree.roots, out);
  return out;
}

std::vector<std::string> check_invariants(const TraceTree& tree) {
  std::vector<std::string> out;
  for (const auto& r : tree.roots) check_node(r, out);
  return out;
}

std::vector<LayerStat> aggregate_layers(const std::vector<TraceTree>& traces,
                                        TraceLevel level) {
  std::map<std::string, LayerStat> stats;
  std::map<std::string, double> sums;
  for (const auto& tree : traces) {
    for (const auto& s : flatten(tree)) {
      if (s.level != level) continue;
      auto [it, inserted] = stats.try_emplace(s.name);
      LayerStat& st = it->second;
      const auto d = s.duration_us();
      if (inserted) {
        st.name = s.name;
        st.min_us = d;
        st.max_us = d;
      }
      st.count += 1;
      st.min_us = std::min(st.min_us, d);
      st.max_us = std::max(st.max_us, d);
      sums[s.name] += static_cast<double>(d);
    }
  }
  std::vector<LayerStat> out;
  for (auto& [name, st] : stats) {
    st.mean_us = sums[name] / static_cast<double>(st.count);
    out.push_back(st);
  }
  return out;
}

}  // namespace evalmesh::tracer
