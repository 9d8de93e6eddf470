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

#include "evalmesh/common/enums.hpp"

#include "evalmesh/common/strings.hpp"

namespace evalmesh {

std::string_view to_string(ElementType t) {
  return t == ElementType::kUInt8 ? "uint8" : "float32";
}

std::string_view to_string(DataLayout l) {
  return l == DataLayout::kNCHW ? "NCHW" : "NHWC";
}

std::string_view to_string(ColorLayout c) {
  return c == ColorLayout::kRGB ? "RGB" : "BGR";
}

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::kAmd64:
      return "amd64";
    case Architecture::kArm64:
      return "arm64";
    case Architecture::kPpc64le:
      return "ppc64le";
  }
  return "amd64";
}

std::string_view to_string(Accelerator a) {
  return a == Accelerator::kCpu ? "cpu" : "gpu";
}

std::optional<ElementType> parse_element_type(std::string_view s) {
  auto v = to_lower(s);
  if (v == "uint8" || v == "int8" || v == "byte") return ElementType::kUInt8;
  if (v == "float32" || v == "float") return ElementType::kFloat32;
  return std::nullopt;
}

std::optional<DataLayout> parse_data_layout(std::string_view s) {
  auto v = to_lower(s);
  if (v == "nchw" || v == "chw") return DataLayout::kNCHW;
  if (v == "nhwc" || v == "hwc") return DataLayout::kNHWC;
  return std::nullopt;
}

std::optional<ColorLayout> parse_color_layout(std::string_view s) {
  auto v = to_lower(s);
  if (v == "rgb") return ColorLayout::kRGB;
  if (v == "bgr") return ColorLayout::kBGR;
  return std::nullopt;
}

std::optional<Architecture> parse_architecture(std::string_view s) {
  auto v = to_lower(s);
  if (v == "amd64" || v == "x86_64") return Architecture::kAmd64;
  if (v == "arm64" || v == "aarch64") return Architecture::kArm64;
  if (v == "ppc64le") return Architecture::kPpc64le;
  return std::nullopt;
}

std::optional<Accelerator> parse_accelerator(std::string_view s) {
  auto v = to_lower(s);
  if (v == "cpu") return Accelerator::kCpu;
  if (v == "gpu") return Accelerator::kGpu;
  return std::nullopt;
}

}  // namespace evalmesh
