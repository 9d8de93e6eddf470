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

#include <random>
#include <string>

#include "evalmesh/common/clock.hpp"
#include "evalmesh/tracer/tracer.hpp"

namespace evalmesh::testing {

// Emits a random nested trace under a virtual clock. Time advances the same
// way whatever the granularity, so traces from one seed are comparable
// across granularities.
inline void emit_random_trace(tracer::Tracer& t, VirtualClock& clock,
                              const std::string& trace_id,
                              std::optional<tracer::TraceLevel> granularity,
                              unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> fanout(0, 3);
  std::uniform_int_distribution<int> gap(0, 50);
  std::uniform_int_distribution<int> deeper(0, 1);

  auto emit = [&](auto& self, tracer::SpanId parent, int level, int depth) -> void {
    const auto lv = static_cast<tracer::TraceLevel>(level);
    const auto name = std::string(tracer::to_string(lv)) + "_" + std::to_string(rng() % 4);
    const auto id = t.start_span(trace_id, parent, lv, name, granularity);
    clock.advance_us(gap(rng));
    const int kids = depth < 4 ? fanout(rng) : 0;
    for (int k = 0; k < kids; ++k) {
      const int child_level = std::min(5, level + deeper(rng) + (level == 1 ? 1 : 0));
      self(self, id, child_level, depth + 1);
      clock.advance_us(gap(rng));
    }
    t.end_span(id);
  };
  emit(emit, tracer::kNullSpan, 1, 0);
}

}  // namespace evalmesh::testing
