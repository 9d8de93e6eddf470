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

#include "evalmesh/pipeline/pipeline.hpp"

#include <string>

#include "evalmesh/common/error.hpp"
#include "evalmesh/pipeline/ops.hpp"

namespace evalmesh::pipeline {

namespace steps = manifest::steps;

namespace {

struct State {
  Tensor tensor;
  ColorLayout color = ColorLayout::kRGB;
  bool ready = false;
};

NormalizeDomain domain_of(const Tensor& t) {
  return t.element_type == ElementType::kUInt8 ? NormalizeDomain::kByte
                                               : NormalizeDomain::kFloat;
}

Tensor back_to_tensor(const Image& img, DataLayout layout) {
  return image_to_tensor(img, layout);
}

class StepRunner {
 public:
  StepRunner(State& state, const PipelineInput& input, std::size_t index)
      : s_(state), input_(input), index_(index) {}

  void operator()(const steps::Decode& d) {
    if (index_ != 0) {
      throw Error(ErrorCode::kInvalidArgument, "decode must be the first step");
    }
    Image img;
    if (const auto* bytes = std::get_if<std::vector<std::uint8_t>>(&input_)) {
      img = decode_image(*bytes, d.color_layout);
    } else {
      img = convert_color(std::get<Image>(input_), d.color_layout);
    }
    s_.color = d.color_layout;
    s_.tensor = image_to_tensor(img, d.data_layout);
    if (d.element_type == ElementType::kFloat32) s_.tensor = cast_to_float(s_.tensor);
  }

  void operator()(const steps::Crop& c) {
    if (c.method != "center") {
      throw Error(ErrorCode::kInvalidArgument, "unsupported crop method " + c.method);
    }
    const auto img = tensor_to_image(s_.tensor, s_.color);
    s_.tensor = back_to_tensor(center_crop(img, c.percentage), s_.tensor.layout);
  }

  void operator()(const steps::Resize& r) {
    if (r.method != "bilinear") {
      throw Error(ErrorCode::kInvalidArgument, "unsupported resize method " + r.method);
    }
    if (r.dimensions.size() != 3 || r.dimensions[0] != Image::kChannels) {
      throw Error(ErrorCode::kInvalidDims, "resize dimensions must be [3, H, W]");
    }
    const auto img = tensor_to_image(s_.tensor, s_.color);
    const auto h = static_cast<int>(r.dimensions[1]);
    const auto w = static_cast<int>(r.dimensions[2]);
    s_.tensor = back_to_tensor(resize_bilinear(img, h, w, r.keep_aspect_ratio),
                               s_.tensor.layout);
  }

  void operator()(const steps::Mean& m) {
    s_.tensor = normalize(s_.tensor, m.values, 1.0F, domain_of(s_.tensor));
  }

  void operator()(const steps::Rescale& r) {
    const float zero = 0.0F;
    s_.tensor = normalize(s_.tensor, std::span(&zero, 1), r.value, domain_of(s_.tensor));
  }

  void operator()(const steps::LayoutConvert& l) {
    s_.tensor = convert_layout(s_.tensor, l.target);
  }

  void operator()(const steps::CastFloat&) {
    if (s_.tensor.element_type == ElementType::kUInt8) s_.tensor = cast_to_float(s_.tensor);
  }

  void operator()(const steps::CastByte&) {
    if (s_.tensor.element_type == ElementType::kFloat32) s_.tensor = cast_to_byte(s_.tensor);
  }

 private:
  State& s_;
  const PipelineInput& input_;
  std::size_t index_;
};

[[noreturn]] void step_error(std::size_t index, std::string_view name, ErrorCode cause,
                             const std::string& message) {
  throw Error(ErrorCode::kStepError,
              "step " + std::to_string(index) + " (" + std::string(name) +
                  ") failed: " + std::string(to_string(cause)) + ": " + message,
              "steps[" + std::to_string(index) + "]");
}

}  // namespace

Tensor run_pipeline(const std::vector<manifest::PipelineStep>& steps,
                    const PipelineInput& input, const PipelineOptions& options) {
  State state;
  if (const auto* img = std::get_if<Image>(&input)) {
    state.tensor = image_to_tensor(*img, DataLayout::kNHWC);
    state.color = img->color_layout;
    state.ready = true;
  }
  const bool starts_with_decode =
      !steps.empty() && std::holds_alternative<manifest::steps::Decode>(steps.front());
  if (!state.ready && !starts_with_decode) {
    step_error(0, steps.empty() ? "none" : manifest::step_name(steps.front()),
               ErrorCode::kInvalidArgument, "encoded input needs a leading decode step");
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto name = manifest::step_name(steps[i]);
    tracer::ScopedSpan span(options.trace, options.parent, tracer::TraceLevel::kModel,
                            "preprocess." + std::string(name));
    try {
      std::visit(StepRunner(state, input, i), steps[i]);
    } catch (const Error& e) {
      step_error(i, name, e.code(), e.what());
    }
  }
  if (const auto* expect = options.expect) {
    if (expect->element_type && *expect->element_type != state.tensor.element_type) {
      throw Error(ErrorCode::kShapeMismatch,
                  "pipeline produced " + std::string(to_string(state.tensor.element_type)) +
                      " but the input declares " +
                      std::string(to_string(*expect->element_type)),
                  "element_type");
    }
    if (expect->layout && *expect->layout != state.tensor.layout) {
      throw Error(ErrorCode::kShapeMismatch,
                  "pipeline produced " + std::string(to_string(state.tensor.layout)) +
                      " but the input declares " + std::string(to_string(*expect->layout)),
                  "layout");
    }
  }
  return std::move(state.tensor);
}

}  // namespace evalmesh::pipeline
