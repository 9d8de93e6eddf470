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

#include "evalmesh/manifest/manifest.hpp"

#include "evalmesh/common/strings.hpp"

namespace evalmesh::manifest {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::kImage:
      return "image";
    case Modality::kBox:
      return "box";
    case Modality::kProbability:
      return "probability";
    case Modality::kClass:
      return "class";
    case Modality::kMask:
      return "mask";
    case Modality::kRaw:
      return "raw";
  }
  return "raw";
}

std::optional<Modality> parse_modality(std::string_view s) {
  auto v = to_lower(s);
  if (v == "image") return Modality::kImage;
  if (v == "box") return Modality::kBox;
  if (v == "probability") return Modality::kProbability;
  if (v == "class") return Modality::kClass;
  if (v == "mask") return Modality::kMask;
  if (v == "raw") return Modality::kRaw;
  return std::nullopt;
}

std::string_view step_name(const PipelineStep& step) {
  struct Namer {
    std::string_view operator()(const steps::Decode&) const { return "decode"; }
    std::string_view operator()(const steps::Crop&) const { return "crop"; }
    std::string_view operator()(const steps::Resize&) const { return "resize"; }
    std::string_view operator()(const steps::Mean&) const { return "mean"; }
    std::string_view operator()(const steps::Rescale&) const { return "rescale"; }
    std::string_view operator()(const steps::LayoutConvert&) const {
      return "layout";
    }
    std::string_view operator()(const steps::CastFloat&) const {
      return "cast_float";
    }
    std::string_view operator()(const steps::CastByte&) const {
      return "cast_byte";
    }
  };
  return std::visit(Namer{}, step);
}

std::string to_string(const LayerName& name) {
  if (const auto* idx = std::get_if<std::int64_t>(&name)) {
    return std::to_string(*idx);
  }
  return std::get<std::string>(name);
}

std::string resolve_source_url(const Source& source, const std::string& path) {
  if (path.find("://") != std::string::npos || path.starts_with("/") ||
      !source.base_url || source.base_url->empty()) {
    return path;
  }
  std::string base = *source.base_url;
  if (!base.ends_with("/")) base += "/";
  return base + path;
}

}  // namespace evalmesh::manifest
