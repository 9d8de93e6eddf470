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

// Deliberately naive reference implementations used as test oracles. They
// share conventions with the library but none of its code.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "evalmesh/pipeline/image.hpp"
#include "evalmesh/pipeline/tensor.hpp"

namespace evalmesh::oracle {

using pipeline::Image;
using pipeline::Tensor;

inline Image random_image(std::mt19937& rng, int h, int w,
                          ColorLayout color = ColorLayout::kRGB) {
  Image img;
  img.height = h;
  img.width = w;
  img.color_layout = color;
  std::uniform_int_distribution<int> px(0, 255);
  for (int i = 0; i < h * w * 3; ++i) img.pixels.push_back(static_cast<std::uint8_t>(px(rng)));
  return img;
}

inline int px(const Image& img, int y, int x, int c) {
  return img.pixels[static_cast<std::size_t>(y * img.width + x) * 3 + c];
}

inline Image swap_channels(const Image& img, ColorLayout target) {
  Image out = img;
  out.color_layout = target;
  if (target == img.color_layout) return out;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.pixels[static_cast<std::size_t>(y * img.width + x) * 3 + c] =
            static_cast<std::uint8_t>(px(img, y, x, 2 - c));
      }
    }
  }
  return out;
}

inline Image window(const Image& img, int top, int left, int h, int w) {
  Image out;
  out.height = h;
  out.width = w;
  out.color_layout = img.color_layout;
  for (int y = top; y < top + h; ++y) {
    for (int x = left; x < left + w; ++x) {
      for (int c = 0; c < 3; ++c) out.pixels.push_back(static_cast<std::uint8_t>(px(img, y, x, c)));
    }
  }
  return out;
}

// Largest size whose percentage of the side does not exceed p, and the
// offset that leaves the margins balanced with any extra pixel at the end.
inline int crop_size(int dim, double p) {
  int out = 0;
  while ((out + 1) * 100.0 <= dim * p) ++out;
  return out < 1 ? 1 : out;
}

inline int crop_offset(int dim, int out) {
  for (int o = 0; o <= dim - out; ++o) {
    const int before = o;
    const int after = dim - out - o;
    if (after - before == 0 || after - before == 1) return o;
  }
  return -1;
}

inline Image crop(const Image& img, double p) {
  const int h = crop_size(img.height, p);
  const int w = crop_size(img.width, p);
  return window(img, crop_offset(img.height, h), crop_offset(img.width, w), h, w);
}

inline Image bilinear(const Image& img, int oh, int ow) {
  Image out;
  out.height = oh;
  out.width = ow;
  out.color_layout = img.color_layout;
  out.pixels.resize(static_cast<std::size_t>(oh) * ow * 3);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double sy = (y + 0.5) * img.height / oh - 0.5;
      double sx = (x + 0.5) * img.width / ow - 0.5;
      if (sy < 0) sy = 0;
      if (sx < 0) sx = 0;
      if (sy > img.height - 1) sy = img.height - 1;
      if (sx > img.width - 1) sx = img.width - 1;
      const int y0 = static_cast<int>(sy);
      const int x0 = static_cast<int>(sx);
      const int ys[2] = {y0, y0 + 1 < img.height ? y0 + 1 : y0};
      const int xs[2] = {x0, x0 + 1 < img.width ? x0 + 1 : x0};
      const double wy[2] = {1.0 - (sy - y0), sy - y0};
      const double wx[2] = {1.0 - (sx - x0), sx - x0};
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) acc += wy[dy] * wx[dx] * px(img, ys[dy], xs[dx], c);
        }
        int v = static_cast<int>(std::floor(acc + 0.5));
        v = v < 0 ? 0 : (v > 255 ? 255 : v);
        out.pixels[static_cast<std::size_t>(y * ow + x) * 3 + c] = static_cast<std::uint8_t>(v);
      }
    }
  }
  return out;
}

inline Image bilinear_cover(const Image& img, int oh, int ow) {
  const double sh = static_cast<double>(oh) / img.height;
  const double sw = static_cast<double>(ow) / img.width;
  const double s = sh > sw ? sh : sw;
  int h = static_cast<int>(std::lround(img.height * s));
  int w = static_cast<int>(std::lround(img.width * s));
  if (h < oh) h = oh;
  if (w < ow) w = ow;
  const Image scaled = (h == img.height && w == img.width) ? img : bilinear(img, h, w);
  return window(scaled, (h - oh) / 2, (w - ow) / 2, oh, ow);
}

// Reorders an NCHW/NHWC rank-4 tensor by enumerating logical indices.
template <typename T>
std::vector<T> relayout(const std::vector<T>& data, std::int64_t n, std::int64_t c,
                        std::int64_t h, std::int64_t w, bool from_nchw) {
  std::vector<T> out(data.size());
  for (std::int64_t in = 0; in < n; ++in) {
    for (std::int64_t ic = 0; ic < c; ++ic) {
      for (std::int64_t ih = 0; ih < h; ++ih) {
        for (std::int64_t iw = 0; iw < w; ++iw) {
          const auto nchw = ((in * c + ic) * h + ih) * w + iw;
          const auto nhwc = ((in * h + ih) * w + iw) * c + ic;
          if (from_nchw) {
            out[nhwc] = data[nchw];
          } else {
            out[nchw] = data[nhwc];
          }
        }
      }
    }
  }
  return out;
}

inline float byte2float(int x) { return static_cast<float>(x) / 255.0F; }

inline int float2byte(float x) {
  if (!(x > 0.0F)) return 0;
  if (x > 1.0F) return 255;
  return static_cast<int>(std::floor(255.0F * x));
}

}  // namespace evalmesh::oracle
