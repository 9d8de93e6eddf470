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

#include "evalmesh/pipeline/tensor.hpp"

#include <cstring>
#include <functional>
#include <numeric>

#include "evalmesh/common/error.hpp"

namespace evalmesh::pipeline {

namespace {

constexpr std::uint8_t kDumpVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::size_t Tensor::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t acc, std::int64_t d) {
                           return acc * static_cast<std::size_t>(std::max<std::int64_t>(d, 0));
                         });
}

std::size_t Tensor::stored_count() const {
  return element_type == ElementType::kUInt8 ? u8.size() : f32.size();
}

void Tensor::check() const {
  for (auto d : shape) {
    if (d < 0) throw Error(ErrorCode::kShapeMismatch, "negative dimension");
  }
  if (element_count() != stored_count()) {
    throw Error(ErrorCode::kShapeMismatch,
                "shape holds " + std::to_string(element_count()) + " elements but " +
                    std::to_string(stored_count()) + " are stored");
  }
}

Tensor make_u8(std::vector<std::int64_t> shape, DataLayout layout,
               std::vector<std::uint8_t> data) {
  Tensor t{ElementType::kUInt8, layout, std::move(shape), std::move(data), {}};
  t.check();
  return t;
}

Tensor make_f32(std::vector<std::int64_t> shape, DataLayout layout, std::vector<float> data) {
  Tensor t{ElementType::kFloat32, layout, std::move(shape), {}, std::move(data)};
  t.check();
  return t;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (a.element_type != b.element_type || a.layout != b.layout || a.shape != b.shape) {
    return false;
  }
  if (a.element_type == ElementType::kUInt8) return a.u8 == b.u8;
  return a.f32.size() == b.f32.size() &&
         std::memcmp(a.f32.data(), b.f32.data(), a.f32.size() * sizeof(float)) == 0;
}

ImageDims image_dims(const Tensor& t) {
  const auto& s = t.shape;
  const bool nchw = t.layout == DataLayout::kNCHW;
  if (s.size() == 4) {
    return nchw ? ImageDims{s[0], s[1], s[2], s[3]} : ImageDims{s[0], s[3], s[1], s[2]};
  }
  if (s.size() == 3) {
    return nchw ? ImageDims{1, s[0], s[1], s[2]} : ImageDims{1, s[2], s[0], s[1]};
  }
  throw Error(ErrorCode::kRankError,
              "image tensor must have rank 3 or 4, got " + std::to_string(s.size()));
}

Tensor stack_batch(const std::vector<Tensor>& items) {
  if (items.empty()) throw Error(ErrorCode::kShapeMismatch, "cannot stack an empty batch");
  const Tensor& first = items.front();
  if (first.shape.size() != 4) throw Error(ErrorCode::kRankError, "batch items must be rank 4");
  Tensor out{first.element_type, first.layout, first.shape, {}, {}};
  out.shape[0] = 0;
  for (const auto& t : items) {
    if (t.element_type != first.element_type || t.layout != first.layout ||
        !std::equal(t.shape.begin() + 1, t.shape.end(), first.shape.begin() + 1) ||
        t.shape.size() != 4) {
      throw Error(ErrorCode::kShapeMismatch, "batch items disagree in type, layout or shape");
    }
    out.shape[0] += t.shape[0];
    out.u8.insert(out.u8.end(), t.u8.begin(), t.u8.end());
    out.f32.insert(out.f32.end(), t.f32.begin(), t.f32.end());
  }
  out.check();
  return out;
}

Tensor slice_batch(const Tensor& t, std::int64_t index) {
  if (t.shape.empty() || index < 0 || index >= t.shape[0]) {
    throw Error(ErrorCode::kShapeMismatch, "batch index out of range");
  }
  Tensor out{t.element_type, t.layout, t.shape, {}, {}};
  out.shape[0] = 1;
  const auto per = out.element_count();
  const auto from = static_cast<std::size_t>(index) * per;
  if (t.element_type == ElementType::kUInt8) {
    out.u8.assign(t.u8.begin() + from, t.u8.begin() + from + per);
  } else {
    out.f32.assign(t.f32.begin() + from, t.f32.begin() + from + per);
  }
  return out;
}

std::vector<std::uint8_t> dump_tensor(const Tensor& t) {
  t.check();
  std::vector<std::uint8_t> out = {'E', 'V', 'T', 'D', kDumpVersion};
  out.push_back(t.element_type == ElementType::kUInt8 ? 0 : 1);
  out.push_back(t.layout == DataLayout::kNCHW ? 0 : 1);
  out.push_back(static_cast<std::uint8_t>(t.shape.size()));
  for (auto d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
  if (t.element_type == ElementType::kUInt8) {
    out.insert(out.end(), t.u8.begin(), t.u8.end());
  } else {
    for (float f : t.f32) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, sizeof bits);
      put_u32(out, bits);
    }
  }
  return out;
}

Tensor load_tensor(std::span<const std::uint8_t> in) {
  auto bad = [](const std::string& why) {
    return Error(ErrorCode::kInvalidArgument, "tensor dump: " + why);
  };
  if (in.size() < 8 || std::memcmp(in.data(), "EVTD", 4) != 0) throw bad("bad magic");
  if (in[4] != kDumpVersion) throw bad("unsupported version");
  if (in[5] > 1 || in[6] > 1) throw bad("bad type or layout byte");
  Tensor t;
  t.element_type = in[5] == 0 ? ElementType::kUInt8 : ElementType::kFloat32;
  t.layout = in[6] == 0 ? DataLayout::kNCHW : DataLayout::kNHWC;
  const std::size_t rank = in[7];
  std::size_t at = 8;
  if (in.size() < at + 4 * rank) throw bad("truncated header");
  for (std::size_t i = 0; i < rank; ++i, at += 4) t.shape.push_back(get_u32(in, at));
  const auto n = t.element_count();
  const std::size_t width = t.element_type == ElementType::kUInt8 ? 1 : 4;
  if (in.size() - at != n * width) throw bad("payload size does not match shape");
  if (width == 1) {
    t.u8.assign(in.begin() + static_cast<std::ptrdiff_t>(at), in.end());
  } else {
    t.f32.resize(n);
    for (std::size_t i = 0; i < n; ++i, at += 4) {
      const auto bits = get_u32(in, at);
      std::memcpy(&t.f32[i], &bits, sizeof bits);
    }
  }
  return t;
}

}  // namespace evalmesh::pipeline
