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

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "evalmesh/manifest/manifest.hpp"
#include "evalmesh/manifest/semver.hpp"
#include "evalmesh/predictor/api.hpp"

namespace evalmesh::predictor {

struct PredictorEntry {
  std::string framework;
  manifest::SemVer version;
  std::shared_ptr<Predictor> predictor;
};

// The predictors an agent bundles, keyed by (framework, version).
class PredictorRegistry {
 public:
  void add(std::string framework, manifest::SemVer version,
           std::shared_ptr<Predictor> predictor);

  // Highest registered version whose framework name matches (ignoring case)
  // and which satisfies the constraint; nullopt when none does.
  std::optional<PredictorEntry> find(const manifest::FrameworkSpec& spec) const;
  std::vector<PredictorEntry> entries() const;
  bool empty() const;

 private:
  mutable std::mutex mu_;
  std::vector<PredictorEntry> entries_;
};

}  // namespace evalmesh::predictor
