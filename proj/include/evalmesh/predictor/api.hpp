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
#include <optional>
#include <string>
#include <vector>

#include "evalmesh/manifest/manifest.hpp"
#include "evalmesh/pipeline/tensor.hpp"
#include "evalmesh/tracer/tracer.hpp"

namespace evalmesh::predictor {

enum class Device { kCpu, kGpuSimulated };
std::string_view to_string(Device d);
std::optional<Device> parse_device(std::string_view s);

struct ResolvedSource {
  std::string graph_path;
  std::optional<std::string> weights_path;
};

struct OpenRequest {
  std::string manifest_key;
  manifest::Manifest manifest;
  ResolvedSource source;
  Device device = Device::kCpu;
  int batch_size = 1;
  tracer::TraceContext trace;
  tracer::SpanId parent = tracer::kNullSpan;
};

using HandleId = std::uint64_t;

struct ModelHandle {
  HandleId id = 0;
  std::string manifest_key;
  std::size_t parameter_count = 0;
  std::vector<std::string> layers;
};

struct PredictRequest {
  HandleId handle = 0;
  pipeline::Tensor batch;
  tracer::TraceContext trace;
  tracer::SpanId parent = tracer::kNullSpan;
};

// One tensor per manifest output, batch dimension first.
struct PredictionResponse {
  std::vector<pipeline::Tensor> outputs;
};

// The three calls every backend implements.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual ModelHandle model_load(const OpenRequest& req) = 0;
  virtual PredictionResponse predict(const PredictRequest& req) = 0;
  virtual void model_unload(HandleId handle) = 0;
};

}  // namespace evalmesh::predictor
