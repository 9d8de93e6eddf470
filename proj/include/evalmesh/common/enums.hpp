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

#include <optional>
#include <string_view>

namespace evalmesh {

enum class ElementType { kUInt8, kFloat32 };
enum class DataLayout { kNCHW, kNHWC };
enum class ColorLayout { kRGB, kBGR };
enum class Architecture { kAmd64, kArm64, kPpc64le };
enum class Accelerator { kCpu, kGpu };

std::string_view to_string(ElementType t);
std::string_view to_string(DataLayout l);
std::string_view to_string(ColorLayout c);
std::string_view to_string(Architecture a);
std::string_view to_string(Accelerator a);

// Case-insensitive. "int8" parses as uint8 (decoded image bytes are
// unsigned); "HWC"/"CHW" are accepted for batchless layouts.
std::optional<ElementType> parse_element_type(std::string_view s);
std::optional<DataLayout> parse_data_layout(std::string_view s);
std::optional<ColorLayout> parse_color_layout(std::string_view s);
// Also accepts uname spellings: x86_64, aarch64.
std::optional<Architecture> parse_architecture(std::string_view s);
std::optional<Accelerator> parse_accelerator(std::string_view s);

}  // namespace evalmesh
