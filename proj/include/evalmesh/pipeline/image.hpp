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
#include "evalmesh/pipeline/tensor.hpp"

namespace evalmesh::pipeline {

// Three-channel 8-bit image stored HWC in `color_layout` order.
struct Image {
  int height = 0;
  int width = 0;
  ColorLayout color_layout = ColorLayout::kRGB;
  std::vector<std::uint8_t> pixels;

  static constexpr int kChannels = 3;

  std::uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  std::uint8_t& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

Image make_image(int height, int width, ColorLayout color);

// Netpbm (P2/P3/P5/P6, maxval <= 255) and PNG. Grayscale is replicated to
// three channels. Throws Error(kUnsupportedFormat) or Error(kCorruptImage).
Image decode_image(std::span<const std::uint8_t> bytes, ColorLayout target);

std::vector<std::uint8_t> encode_ppm(const Image& img);
std::vector<std::uint8_t> encode_png(const Image& img);

// [1, H, W, 3] or [1, 3, H, W] uint8.
Tensor image_to_tensor(const Image& img, DataLayout layout);
// Accepts uint8 rank-3 or rank-4 (N = 1) tensors with three channels.
Image tensor_to_image(const Tensor& t, ColorLayout color);

}  // namespace evalmesh::pipeline
