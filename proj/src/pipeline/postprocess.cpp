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

#include "evalmesh/pipeline/postprocess.hpp"

#include <algorithm>
#include <numeric>

#include "evalmesh/common/error.hpp"

namespace evalmesh::pipeline {

std::vector<Prediction> top_k(std::span<const float> probabilities, std::size_t k,
                              const std::vector<std::string>* labels) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (probabilities.empty()) throw Error(ErrorCode::kEmptyOutput, "no probabilities to rank");
  std::vector<std::size_t> order(probabilities.size());
  std::iota(order.begin(), order.end(), 0);
  const auto n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (probabilities[a] != probabilities[b]) {
                        return probabilities[a] > probabilities[b];
                      }
                      return a < b;
                    });
  std::vector<Prediction> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Prediction p{order[i], std::nullopt, probabilities[order[i]]};
    if (labels != nullptr && order[i] < labels->size()) p.label = (*labels)[order[i]];
    out.push_back(std::move(p));
  }
  return out;
}

float iou(const BoundingBox& a, const BoundingBox& b) {
  auto span = [](float lo, float hi) {
    return std::max(0.0, static_cast<double>(hi) - static_cast<double>(lo));
  };
  const double inter = span(std::max(a.ymin, b.ymin), std::min(a.ymax, b.ymax)) *
                       span(std::max(a.xmin, b.xmin), std::min(a.xmax, b.xmax));
  const double area_a = span(a.ymin, a.ymax) * span(a.xmin, a.xmax);
  const double area_b = span(b.ymin, b.ymax) * span(b.xmin, b.xmax);
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) {
    return a.ymin == b.ymin && a.xmin == b.xmin && a.ymax == b.ymax && a.xmax == b.xmax
               ? 1.0F
               : 0.0F;
  }
  return static_cast<float>(std::clamp(inter / uni, 0.0, 1.0));
}

}  // namespace evalmesh::pipeline
