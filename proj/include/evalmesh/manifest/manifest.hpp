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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "evalmesh/common/enums.hpp"
#include "evalmesh/manifest/semver.hpp"

namespace evalmesh::manifest {

enum class Modality { kImage, kBox, kProbability, kClass, kMask, kRaw };
std::string_view to_string(Modality m);
std::optional<Modality> parse_modality(std::string_view s);

namespace steps {

struct Decode {
  ElementType element_type = ElementType::kUInt8;
  DataLayout data_layout = DataLayout::kNHWC;
  ColorLayout color_layout = ColorLayout::kRGB;
  // The document spelled the element type "int8"; kept for diagnostics.
  bool declared_int8 = false;
  friend bool operator==(const Decode&, const Decode&) = default;
};

struct Crop {
  std::string method = "center";
  double percentage = 100.0;
  friend bool operator==(const Crop&, const Crop&) = default;
};

struct Resize {
  std::vector<std::int64_t> dimensions;  // [C, H, W]
  std::string method = "bilinear";
  bool keep_aspect_ratio = false;
  friend bool operator==(const Resize&, const Resize&) = default;
};

// One value broadcasts to every channel.
struct Mean {
  std::vector<float> values;
  friend bool operator==(const Mean&, const Mean&) = default;
};

struct Rescale {
  float value = 1.0F;
  friend bool operator==(const Rescale&, const Rescale&) = default;
};

struct LayoutConvert {
  DataLayout target = DataLayout::kNCHW;
  friend bool operator==(const LayoutConvert&, const LayoutConvert&) = default;
};

struct CastFloat {
  friend bool operator==(const CastFloat&, const CastFloat&) = default;
};

struct CastByte {
  friend bool operator==(const CastByte&, const CastByte&) = default;
};

}  // namespace steps

using PipelineStep =
    std::variant<steps::Decode, steps::Crop, steps::Resize, steps::Mean,
                 steps::Rescale, steps::LayoutConvert, steps::CastFloat,
                 steps::CastByte>;

// Manifest key used for the step ("decode", "crop", ...).
std::string_view step_name(const PipelineStep& step);

using LayerName = std::variant<std::string, std::int64_t>;
std::string to_string(const LayerName& name);

struct IOSpec {
  Modality modality = Modality::kRaw;
  std::optional<LayerName> layer_name;
  std::optional<ElementType> element_type;
  std::optional<DataLayout> layout;
  std::optional<ColorLayout> color_layout;
  std::optional<std::string> features_url;
  std::vector<PipelineStep> steps;
  friend bool operator==(const IOSpec&, const IOSpec&) = default;
};

struct ContainerEntry {
  // Either a single image for every accelerator, or a cpu/gpu pair.
  std::optional<std::string> single;
  std::optional<std::string> cpu;
  std::optional<std::string> gpu;
  friend bool operator==(const ContainerEntry&, const ContainerEntry&) = default;
};

using ContainerMap = std::map<Architecture, ContainerEntry>;

struct FrameworkSpec {
  std::string name;
  std::optional<VersionConstraint> constraint;
  friend bool operator==(const FrameworkSpec&, const FrameworkSpec&) = default;
};

struct Source {
  std::string graph_path;
  std::optional<std::string> weights_path;
  std::optional<std::string> base_url;
  // Optional sha256 digests (hex) of the graph and weights files.
  std::optional<std::string> graph_checksum;
  std::optional<std::string> weights_checksum;
  friend bool operator==(const Source&, const Source&) = default;
};

struct Manifest {
  std::string name;
  std::optional<SemVer> version;
  std::string task;
  std::string license;
  std::string description;
  std::optional<FrameworkSpec> framework;
  ContainerMap containers;
  std::vector<std::pair<std::string, std::string>> envvars;
  std::vector<IOSpec> inputs;
  std::vector<IOSpec> outputs;
  Source source;
  // Nested values are flattened with dotted keys; sequences are kept as
  // their flow-style text.
  std::map<std::string, std::string> attributes;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// Joins `path` onto `base_url` unless it already carries a scheme or is
// absolute.
std::string resolve_source_url(const Source& source, const std::string& path);

}  // namespace evalmesh::manifest
