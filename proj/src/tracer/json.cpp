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

#include "evalmesh/tracer/json.hpp"

#include "evalmesh/common/error.hpp"

namespace evalmesh::tracer {

using nlohmann::json;

namespace {

TraceLevel level_from(const json& j) {
  auto level = parse_trace_level(j.get<std::string>());
  if (!level) {
    throw Error(ErrorCode::kInvalidArgument, "unknown trace level " + j.dump(), "level");
  }
  return *level;
}

json node_to_json(const SpanNode& node) {
  json j = {{"id", node.span.id},
            {"name", node.span.name},
            {"level", to_string(node.span.level)},
            {"begin_us", node.span.begin_us},
            {"end_us", node.span.end_us},
            {"tags", node.span.tags},
            {"children", json::array()}};
  for (const auto& c : node.children) j["children"].push_back(node_to_json(c));
  return j;
}

void node_from_json(const json& j, const std::string& trace_id, SpanId parent,
                    std::vector<Span>& out) {
  Span s;
  s.id = j.at("id").get<SpanId>();
  s.parent = parent;
  s.trace_id = trace_id;
  s.level = level_from(j.at("level"));
  s.name = j.at("name").get<std::string>();
  s.begin_us = j.at("begin_us").get<std::int64_t>();
  s.end_us = j.at("end_us").get<std::int64_t>();
  if (j.contains("tags")) s.tags = j["tags"].get<std::map<std::string, std::string>>();
  out.push_back(s);
  if (j.contains("children")) {
    for (const auto& c : j["children"]) node_from_json(c, trace_id, s.id, out);
  }
}

}  // namespace

json span_to_json(const Span& span) {
  return {{"id", span.id},
          {"parent", span.parent},
          {"trace_id", span.trace_id},
          {"level", to_string(span.level)},
          {"name", span.name},
          {"begin_us", span.begin_us},
          {"end_us", span.end_us},
          {"tags", span.tags}};
}

Span span_from_json(const json& j) {
  try {
    Span s;
    s.id = j.at("id").get<SpanId>();
    s.parent = j.value("parent", kNullSpan);
    s.trace_id = j.at("trace_id").get<std::string>();
    s.level = level_from(j.at("level"));
    s.name = j.at("name").get<std::string>();
    s.begin_us = j.at("begin_us").get<std::int64_t>();
    s.end_us = j.at("end_us").get<std::int64_t>();
    if (j.contains("tags")) s.tags = j["tags"].get<std::map<std::string, std::string>>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad span: ") + e.what());
  }
}

json tree_to_json(const TraceTree& tree) {
  json j = {{"trace_id", tree.trace_id}, {"spans", json::array()}};
  for (const auto& r : tree.roots) j["spans"].push_back(node_to_json(r));
  return j;
}

json flat_to_json(const TraceTree& tree) {
  json j = {{"trace_id", tree.trace_id}, {"spans", json::array()}};
  for (const auto& s : flatten(tree)) j["spans"].push_back(span_to_json(s));
  return j;
}

TraceTree tree_from_json(const json& j) {
  try {
    const auto trace_id = j.at("trace_id").get<std::string>();
    std::vector<Span> spans;
    for (const auto& r : j.at("spans")) node_from_json(r, trace_id, kNullSpan, spans);
    return build_tree(trace_id, std::move(spans));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad trace: ") + e.what());
  }
}

}  // namespace evalmesh::tracer
