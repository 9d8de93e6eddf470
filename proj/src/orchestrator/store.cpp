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

#include "evalmesh/orchestrator/store.hpp"

#include <algorithm>
#include <tuple>

#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"

namespace evalmesh::orchestrator {

bool matches(const wire::EvaluationResult& r, const HistoryFilter& f) {
  if (f.model && !registry::glob_match(*f.model, r.model_name)) return false;
  if (f.model_version) {
    try {
      if (!f.model_version->matches(manifest::SemVer::parse(r.model_version))) return false;
    } catch (const Error&) {
      return false;
    }
  }
  if (f.framework) {
    if (!iequals(f.framework->name, r.framework.name)) return false;
    if (f.framework->constraint && !f.framework->constraint->matches(r.framework.version)) {
      return false;
    }
  }
  if (!registry::satisfies_hardware(r.hardware, f.hardware)) return false;
  if (f.agent_id && *f.agent_id != r.agent_id) return false;
  if (f.evaluation_id && *f.evaluation_id != r.evaluation_id) return false;
  if (f.status && *f.status != r.status) return false;
  if (f.batch_size && *f.batch_size != r.batch_size) return false;
  return true;
}

bool history_less(const wire::EvaluationResult& a, const wire::EvaluationResult& b) {
  return std::tie(a.completed_at_ms, a.evaluation_id, a.agent_id, a.batch_size) <
         std::tie(b.completed_at_ms, b.evaluation_id, b.agent_id, b.batch_size);
}

void InMemoryResultStore::append(const wire::EvaluationResult& r) {
  std::unique_lock lock(mu_);
  const auto pos = std::upper_bound(results_.begin(), results_.end(), r, history_less);
  results_.insert(pos, r);
}

std::vector<wire::EvaluationResult> InMemoryResultStore::query(const HistoryFilter& f) const {
  std::shared_lock lock(mu_);
  std::vector<wire::EvaluationResult> out;
  for (const auto& r : results_) {
    if (matches(r, f)) out.push_back(r);
  }
  return out;
}

JsonlResultStore::JsonlResultStore(std::string path) : path_(std::move(path)) {
  {
    std::ifstream in(path_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        throw Error(ErrorCode::kSyntaxError,
                    path_ + ":" + std::to_string(lineno) + " is not valid JSON");
      }
      index_.append(wire::result_from_json(j));
    }
  }
  out_.open(path_, std::ios::app);
  if (!out_) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path_ + " for append");
}

void JsonlResultStore::append(const wire::EvaluationResult& r) {
  {
    std::lock_guard lock(write_mu_);
    out_ << wire::to_json(r).dump() << '\n';
    out_.flush();
  }
  index_.append(r);
}

std::vector<wire::EvaluationResult> JsonlResultStore::query(const HistoryFilter& f) const {
  return index_.query(f);
}

void TraceStore::add(const std::vector<tracer::Span>& spans) {
  std::unique_lock lock(mu_);
  for (const auto& s : spans) traces_[s.trace_id][s.id] = s;
}

tracer::TraceTree TraceStore::get(const std::string& trace_id) const {
  std::vector<tracer::Span> spans;
  {
    std::shared_lock lock(mu_);
    const auto it = traces_.find(trace_id);
    if (it == traces_.end()) throw Error(ErrorCode::kNotFound, "no trace " + trace_id);
    for (const auto& [id, s] : it->second) spans.push_back(s);
  }
  return tracer::build_tree(trace_id, std::move(spans));
}

bool TraceStore::contains(const std::string& trace_id) const {
  std::shared_lock lock(mu_);
  return traces_.contains(trace_id);
}

}  // namespace evalmesh::orchestrator
