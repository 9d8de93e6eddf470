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

#include "evalmesh/common/enums.hpp"

namespace evalmesh::pipeline {

// Row-major payload; exactly one of u8/f32 is populated, matching
// element_type. Image tensors are [N, C, H, W] or [N, H, W, C] (rank 4) or
// the batchless rank-3 forms, ordered as `layout` says.
struct Tensor {
  ElementType element_type = ElementType::kUInt8;
  DataLayout layout = DataLayout::kNHWC;
  std::vector<std::int64_t> shape;
  std::vector<std::uint8_t> u8;
  std::vector<float> f32;

  std::size_t element_count() const;
  std::size_t stored_count() const;
  // Throws Error(kShapeMismatch) unless product(shape) == stored_count().
  void check() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

Tensor make_u8(std::vector<std::int64_t> shape, DataLayout layout,
               std::vector<std::uint8_t> data);
Tensor make_f32(std::vector<std::int64_t> shape, DataLayout layout,
                std::vector<float> data);

// Equality on the bit patterns of the stored values.
bool bit_equal(const Tensor& a, const Tensor& b);

struct ImageDims {
  std::int64_t n = 1;
  std::int64_t c = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;
};

// Reads N/C/H/W from the shape using the declared layout. Throws
// Error(kRankError) for ranks other than 3 and 4.
ImageDims image_dims(const Tensor& t);

// Concatenates rank-4 tensors along N; all other dims, types and layouts
// must agree (Error(kShapeMismatch) otherwise).
Tensor stack_batch(const std::vector<Tensor>& items);
Tensor slice_batch(const Tensor& t, std::int64_t index);

// "EVTD" magic, format version, element type, layout, rank, u32 LE dims,
// then the values little-endian.
std::vector<std::uint8_t> dump_tensor(const Tensor& t);
Tensor load_tensor(std::span<const std::uint8_t> bytes);

}  // namespace evalmesh::pipeline
