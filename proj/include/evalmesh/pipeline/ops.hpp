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

#include <span>

#include "evalmesh/pipeline/image.hpp"
#include "evalmesh/pipeline/tensor.hpp"

namespace evalmesh::pipeline {

Image convert_color(const Image& img, ColorLayout target);

// Window of floor(dim * p / 100) (at least 1) per axis at offset
// floor((dim - out) / 2). Throws Error(kInvalidPercentage) outside (0, 100].
Image center_crop(const Image& img, double percentage);

// Half-pixel-centre bilinear sampling with edge clamping, rounded half-up.
// keep_aspect_ratio scales uniformly to cover the target, then centre-crops.
// Throws Error(kInvalidDims) for empty inputs or targets.
Image resize_bilinear(const Image& img, int out_h, int out_w, bool keep_aspect_ratio);

// x / 255 per element.
Tensor cast_to_float(const Tensor& t);
// floor(255 * clamp(x, 0, 1)) per element.
Tensor cast_to_byte(const Tensor& t);

enum class NormalizeDomain { kByte, kFloat };

// (x - mean[c]) / rescale, with the channel taken from the layout. kByte
// works on raw uint8 values; kFloat first maps uint8 inputs through x / 255.
// `mean` has one entry or one per channel (Error(kChannelMismatch)).
Tensor normalize(const Tensor& t, std::span<const float> mean, float rescale,
                 NormalizeDomain domain);

// Rank 3 or 4 only (Error(kRankError)).
Tensor convert_layout(const Tensor& t, DataLayout target);

}  // namespace evalmesh::pipeline
