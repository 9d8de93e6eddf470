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
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "evalmesh/common/clock.hpp"
#include "evalmesh/manifest/semver.hpp"
#include "evalmesh/predictor/api.hpp"
#include "evalmesh/predictor/registry.hpp"

namespace evalmesh::predictor {

inline constexpr std::string_view kReferenceFramework = "refnn";

// A loaded reference network producing class probabilities [N, K].
class Model {
 public:
  virtual ~Model() = default;
  virtual std::size_t parameter_count() const = 0;
  virtual std::vector<std::string> layers() const = 0;
  virtual std::size_t classes(const pipeline::Tensor& batch) const = 0;
  virtual std::vector<float> forward(const pipeline::Tensor& batch,
                                     const tracer::TraceContext& trace,
                                     tracer::SpanId parent) = 0;
};

// Picks the model from the manifest attribute `architecture`:
//   linear_softmax     weights file, softmax(W x + b) over the flattened item
//   channel_mean       softmax of the per-channel means, no weights
//   synthetic_profile  graph JSON {layers: [{name, duration_us, kernels:
//                      [{name, duration_us}]}], classes}; sleeps through the
//                      clock and emits LAYER/LIBRARY spans, uniform output
std::unique_ptr<Model> make_model(const OpenRequest& req, Clock& clock);

// float32 softmax with max subtraction.
std::vector<float> softmax(std::span<const float> logits);

class ReferencePredictor final : public Predictor {
 public:
  struct Options {
    manifest::SemVer version{1, 13, 0, {}};
    bool gpu_available = false;
    Clock* clock = nullptr;  // defaults to the monotonic clock
  };

  ReferencePredictor() : ReferencePredictor(Options{}) {}
  explicit ReferencePredictor(Options options);

  ModelHandle model_load(const OpenRequest& req) override;
  PredictionResponse predict(const PredictRequest& req) override;
  void model_unload(HandleId handle) override;

  std::size_t open_handles() const;

 private:
  struct Slot {
    ModelHandle handle;
    manifest::Manifest manifest;
    std::unique_ptr<Model> model;
    std::shared_mutex busy;
    bool closed = false;
  };

  std::shared_ptr<Slot> lookup(HandleId id) const;

  Options options_;
  Clock& clock_;
  mutable std::shared_mutex mu_;
  std::unordered_map<HandleId, std::shared_ptr<Slot>> slots_;
  HandleId next_id_ = 1;
};

std::vector<manifest::SemVer> reference_versions();

// Registers refnn at each of `versions` (1.10.0 through 1.13.0 when empty).
void register_reference_predictors(PredictorRegistry& registry,
                                   std::vector<manifest::SemVer> versions = {},
                                   bool gpu_available = false, Clock* clock = nullptr);

}  // namespace evalmesh::predictor
