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
#include <span>
#include <vector>

namespace evalmesh::predictor {

// Linear model weights: u32 LE rows, u32 LE cols, rows*cols f32 LE (row
// major), then rows f32 LE bias values.
struct LinearWeights {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> w;
  std::vector<float> bias;

  std::size_t parameter_count() const { return w.size() + bias.size(); }
};

std::vector<std::uint8_t> encode_weights(const LinearWeights& weights);
// Throws Error(kBadWeights) when the payload does not match its header.
LinearWeights decode_weights(std::span<const std::uint8_t> bytes);

}  // namespace evalmesh::predictor
