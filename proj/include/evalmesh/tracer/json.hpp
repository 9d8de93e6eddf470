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

#include "evalmesh/tracer/span.hpp"

namespace evalmesh::tracer {

// Span: {id, parent, trace_id, level, name, begin_us, end_us, tags}.
nlohmann::json span_to_json(const Span& span);
Span span_from_json(const nlohmann::json& j);

// Tree form: {trace_id, spans: [{id, name, level, begin_us, end_us, tags,
// children: [...]}]}. Flat form lists spans depth-first with parent ids.
nlohmann::json tree_to_json(const TraceTree& tree);
nlohmann::json flat_to_json(const TraceTree& tree);
TraceTree tree_from_json(const nlohmann::json& j);

}  // namespace evalmesh::tracer
