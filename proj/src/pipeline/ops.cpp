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

#include "evalmesh/pipeline/ops.hpp"

#include <algorithm>
#include <cmath>

#include "evalmesh/common/error.hpp"

namespace evalmesh::pipeline {

namespace {

Image crop_window(const Image& img, int top, int left, int h, int w) {
  Image out = make_image(h, w, img.color_layout);
  for (int y = 0; y < h; ++y) {
    const auto* src = &img.pixels[(static_cast<std::size_t>(top + y) * img.width + left) * 3];
    std::copy(src, src + static_cast<std::size_t>(w) * 3,
              out.pixels.begin() + static_cast<std::ptrdiff_t>(y) * w * 3);
  }
  return out;
}

struct Tap {
  int lo;
  int hi;
  double w_lo;
  double w_hi;
};

Tap tap(int d, int in, int out) {
  double s = (d + 0.5) * in / out - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(in - 1));
  const int lo = static_cast<int>(std::floor(s));
  const int hi = std::min(lo + 1, in - 1);
  const double f = s - lo;
  return {lo, hi, 1.0 - f, f};
}

Image resize_exact(const Image& img, int out_h, int out_w) {
  Image out = make_image(out_h, out_w, img.color_layout);
  std::vector<Tap> xs(out_w);
  for (int x = 0; x < out_w; ++x) xs[x] = tap(x, img.width, out_w);
  for (int y = 0; y < out_h; ++y) {
    const Tap ty = tap(y, img.height, out_h);
    for (int x = 0; x < out_w; ++x) {
      const Tap& tx = xs[x];
      for (int c = 0; c < 3; ++c) {
        const double v = ty.w_lo * tx.w_lo * img.at(ty.lo, tx.lo, c) +
                         ty.w_lo * tx.w_hi * img.at(ty.lo, tx.hi, c) +
                         ty.w_hi * tx.w_lo * img.at(ty.hi, tx.lo, c) +
                         ty.w_hi * tx.w_hi * img.at(ty.hi, tx.hi, c);
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

// Strides of the (n, c, h, w) axes in the tensor's flat storage.
struct Strides {
  std::size_t n, c, h, w;
};

Strides strides_of(const ImageDims& d, DataLayout layout) {
  const auto c = static_cast<std::size_t>(d.c);
  const auto h = static_cast<std::size_t>(d.h);
  const auto w = static_cast<std::size_t>(d.w);
  if (layout == DataLayout::kNCHW) return {c * h * w, h * w, w, 1};
  return {h * w * c, 1, w * c, c};
}

}  // namespace

Image convert_color(const Image& img, ColorLayout target) {
  if (img.color_layout == target) return img;
  Image out = img;
  out.color_layout = target;
  for (std::size_t i = 0; i + 2 < out.pixels.size(); i += 3) {
    std::swap(out.pixels[i], out.pixels[i + 2]);
  }
  return out;
}

Image center_crop(const Image& img, double percentage) {
  if (!(percentage > 0.0 && percentage <= 100.0)) {
    throw Error(ErrorCode::kInvalidPercentage,
                "crop percentage must lie in (0, 100], got " + std::to_string(percentage));
  }
  if (img.height < 1 || img.width < 1) throw Error(ErrorCode::kInvalidDims, "empty image");
  const int h = std::max(1, static_cast<int>(std::floor(img.height * percentage / 100.0)));
  const int w = std::max(1, static_cast<int>(std::floor(img.width * percentage / 100.0)));
  return crop_window(img, (img.height - h) / 2, (img.width - w) / 2, h, w);
}

Image resize_bilinear(const Image& img, int out_h, int out_w, bool keep_aspect_ratio) {
  if (out_h < 1 || out_w < 1) {
    throw Error(ErrorCode::kInvalidDims, "resize target must be at least 1x1");
  }
  if (img.height < 1 || img.width < 1) throw Error(ErrorCode::kInvalidDims, "empty image");
  if (!keep_aspect_ratio) return resize_exact(img, out_h, out_w);
  const double scale = std::max(static_cast<double>(out_h) / img.height,
                                static_cast<double>(out_w) / img.width);
  const int h = std::max(out_h, static_cast<int>(std::lround(img.height * scale)));
  const int w = std::max(out_w, static_cast<int>(std::lround(img.width * scale)));
  const Image scaled =
      h == img.height && w == img.width ? img : resize_exact(img, h, w);
  return crop_window(scaled, (h - out_h) / 2, (w - out_w) / 2, out_h, out_w);
}

Tensor cast_to_float(const Tensor& t) {
  if (t.element_type != ElementType::kUInt8) {
    throw Error(ErrorCode::kInvalidArgument, "cast_to_float needs a uint8 tensor");
  }
  Tensor out{ElementType::kFloat32, t.layout, t.shape, {}, {}};
  out.f32.reserve(t.u8.size());
  for (auto x : t.u8) out.f32.push_back(static_cast<float>(x) / 255.0F);
  return out;
}

Tensor cast_to_byte(const Tensor& t) {
  if (t.element_type != ElementType::kFloat32) {
    throw Error(ErrorCode::kInvalidArgument, "cast_to_byte needs a float32 tensor");
  }
  Tensor out{ElementType::kUInt8, t.layout, t.shape, {}, {}};
  out.u8.reserve(t.f32.size());
  for (float x : t.f32) {
    const float c = std::isnan(x) ? 0.0F : std::clamp(x, 0.0F, 1.0F);
    out.u8.push_back(static_cast<std::uint8_t>(std::floor(255.0F * c)));
  }
  return out;
}

Tensor normalize(const Tensor& t, std::span<const float> mean, float rescale,
                 NormalizeDomain domain) {
  if (domain == NormalizeDomain::kByte && t.element_type != ElementType::kUInt8) {
    throw Error(ErrorCode::kInvalidArgument, "byte-domain normalization needs a uint8 tensor");
  }
  if (rescale == 0.0F) throw Error(ErrorCode::kInvalidArgument, "rescale must be non-zero");
  const auto d = image_dims(t);
  if (mean.size() != 1 && mean.size() != static_cast<std::size_t>(d.c)) {
    throw Error(ErrorCode::kChannelMismatch,
                "mean has " + std::to_string(mean.size()) + " values for " +
                    std::to_string(d.c) + " channels");
  }
  Tensor out{ElementType::kFloat32, t.layout, t.shape, {}, {}};
  out.f32.resize(t.element_count());
  const auto st = strides_of(d, t.layout);
  const bool from_bytes = t.element_type == ElementType::kUInt8;
  const bool to_unit = domain == NormalizeDomain::kFloat && from_bytes;
  for (std::int64_t n = 0; n < d.n; ++n) {
    for (std::int64_t c = 0; c < d.c; ++c) {
      const float m = mean.size() == 1 ? mean[0] : mean[c];
      for (std::int64_t h = 0; h < d.h; ++h) {
        for (std::int64_t w = 0; w < d.w; ++w) {
          const auto i = n * st.n + c * st.c + h * st.h + w * st.w;
          float x = from_bytes ? static_cast<float>(t.u8[i]) : t.f32[i];
          if (to_unit) x /= 255.0F;
          out.f32[i] = (x - m) / rescale;
        }
      }
    }
  }
  return out;
}

Tensor convert_layout(const Tensor& t, DataLayout target) {
  const auto d = image_dims(t);
  t.check();
  Tensor out{t.element_type, target, {}, {}, {}};
  const bool batched = t.shape.size() == 4;
  if (target == DataLayout::kNCHW) {
    out.shape = batched ? std::vector<std::int64_t>{d.n, d.c, d.h, d.w}
                        : std::vector<std::int64_t>{d.c, d.h, d.w};
  } else {
    out.shape = batched ? std::vector<std::int64_t>{d.n, d.h, d.w, d.c}
                        : std::vector<std::int64_t>{d.h, d.w, d.c};
  }
  if (t.layout == target) {
    out.u8 = t.u8;
    out.f32 = t.f32;
    return out;
  }
  const auto src = strides_of(d, t.layout);
  const auto dst = strides_of(d, target);
  if (t.element_type == ElementType::kUInt8) {
    out.u8.resize(t.u8.size());
  } else {
    out.f32.resize(t.f32.size());
  }
  for (std::int64_t n = 0; n < d.n; ++n) {
    for (std::int64_t c = 0; c < d.c; ++c) {
      for (std::int64_t h = 0; h < d.h; ++h) {
        for (std::int64_t w = 0; w < d.w; ++w) {
          const auto i = n * src.n + c * src.c + h * src.h + w * src.w;
          const auto o = n * dst.n + c * dst.c + h * dst.h + w * dst.w;
          if (t.element_type == ElementType::kUInt8) {
            out.u8[o] = t.u8[i];
          } else {
            out.f32[o] = t.f32[i];
          }
        }
      }
    }
  }
  return out;
}

}  // namespace evalmesh::pipeline
