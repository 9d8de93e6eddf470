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

#include "evalmesh/predictor/weights.hpp"

#include <cstring>

#include "evalmesh/common/error.hpp"

namespace evalmesh::predictor {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  put_u32(out, bits);
}

float get_f32(std::span<const std::uint8_t> in, std::size_t at) {
  const auto bits = get_u32(in, at);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

}  // namespace

std::vector<std::uint8_t> encode_weights(const LinearWeights& weights) {
  std::vector<std::uint8_t> out;
  put_u32(out, weights.rows);
  put_u32(out, weights.cols);
  for (float v : weights.w) put_f32(out, v);
  for (float v : weights.bias) put_f32(out, v);
  return out;
}

LinearWeights decode_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw Error(ErrorCode::kBadWeights, "weights header truncated");
  LinearWeights lw;
  lw.rows = get_u32(bytes, 0);
  lw.cols = get_u32(bytes, 4);
  if (lw.rows == 0 || lw.cols == 0) throw Error(ErrorCode::kBadWeights, "empty weight matrix");
  const std::uint64_t values =
      static_cast<std::uint64_t>(lw.rows) * lw.cols + static_cast<std::uint64_t>(lw.rows);
  if (bytes.size() - 8 != values * 4) {
    throw Error(ErrorCode::kBadWeights,
                "weights payload is " + std::to_string(bytes.size() - 8) + " bytes, header needs " +
                    std::to_string(values * 4));
  }
  std::size_t at = 8;
  lw.w.resize(static_cast<std::size_t>(lw.rows) * lw.cols);
  for (auto& v : lw.w) {
    v = get_f32(bytes, at);
    at += 4;
  }
  lw.bias.resize(lw.rows);
  for (auto& v : lw.bias) {
    v = get_f32(bytes, at);
    at += 4;
  }
  return lw;
}

}  // namespace evalmesh::predictor
