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
#include <variant>
#include <vector>

#include "evalmesh/manifest/manifest.hpp"
#include "evalmesh/pipeline/image.hpp"
#include "evalmesh/pipeline/tensor.hpp"
#include "evalmesh/tracer/tracer.hpp"

namespace evalmesh::pipeline {

using PipelineInput = std::variant<std::vector<std::uint8_t>, Image>;

struct PipelineOptions {
  // When set, the result must match its element_type and layout.
  const manifest::IOSpec* expect = nullptr;
  tracer::TraceContext trace;
  tracer::SpanId parent = tracer::kNullSpan;
};

// Folds the steps over the input in order. Encoded bytes need a leading
// decode step; an Image input starts as [1, H, W, 3] uint8 NHWC. A failing
// step raises Error(kStepError) with field "steps[i]". Each step is traced
// as a MODEL span "preprocess.<step>".
Tensor run_pipeline(const std::vector<manifest::PipelineStep>& steps,
                    const PipelineInput& input, const PipelineOptions& options = {});

}  // namespace evalmesh::pipeline
