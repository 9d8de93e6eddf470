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

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evalmesh::pipeline {

struct Prediction {
  std::size_t index = 0;
  std::optional<std::string> label;
  float probability = 0.0F;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Highest probabilities first, ties by ascending index. Throws
// Error(kEmptyOutput) on an empty input and Error(kInvalidArgument) for k < 1.
std::vector<Prediction> top_k(std::span<const float> probabilities, std::size_t k,
                              const std::vector<std::string>* labels = nullptr);

struct BoundingBox {
  float ymin = 0.0F;
  float xmin = 0.0F;
  float ymax = 0.0F;
  float xmax = 0.0F;
};

float iou(const BoundingBox& a, const BoundingBox& b);

}  // namespace evalmesh::pipeline
