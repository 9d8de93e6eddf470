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

#include "evalmesh/predictor/registry.hpp"

#include "evalmesh/common/strings.hpp"

namespace evalmesh::predictor {

void PredictorRegistry::add(std::string framework, manifest::SemVer version,
                            std::shared_ptr<Predictor> predictor) {
  std::lock_guard lock(mu_);
  entries_.push_back({std::move(framework), std::move(version), std::move(predictor)});
}

std::optional<PredictorEntry> PredictorRegistry::find(const manifest::FrameworkSpec& spec) const {
  std::lock_guard lock(mu_);
  const PredictorEntry* best = nullptr;
  for (const auto& e : entries_) {
    if (!iequals(e.framework, spec.name)) continue;
    if (spec.constraint && !spec.constraint->matches(e.version)) continue;
    if (best == nullptr || best->version < e.version) best = &e;
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

std::vector<PredictorEntry> PredictorRegistry::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

bool PredictorRegistry::empty() const {
  std::lock_guard lock(mu_);
  return entries_.empty();
}

}  // namespace evalmesh::predictor
