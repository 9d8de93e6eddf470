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

#include "evalmesh/manifest/validate.hpp"

#include <algorithm>
#include <sstream>

#include "evalmesh/common/error.hpp"
#include "evalmesh/manifest/document.hpp"

namespace evalmesh::manifest {

std::string_view to_string(Severity s) {
  return s == Severity::kError ? "ERROR" : "WARNING";
}

bool ValidationReport::has_errors() const { return error_count() > 0; }

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(issues.begin(), issues.end(), [](const ValidationIssue& i) {
        return i.severity == Severity::kError;
      }));
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  for (const auto& i : issues) {
    os << to_string(i.severity) << " " << i.field << ": " << i.message << "\n";
  }
  return os.str();
}

namespace {

class Collector {
 public:
  void error(std::string field, std::string message) {
    report.issues.push_back({Severity::kError, std::move(field), std::move(message)});
  }
  void warning(std::string field, std::string message) {
    report.issues.push_back(
        {Severity::kWarning, std::move(field), std::move(message)});
  }
  ValidationReport report;
};

bool valid_image_ref(const std::string& ref) {
  auto colon = ref.rfind(':');
  return colon != std::string::npos && colon > 0 && colon + 1 < ref.size() &&
         ref.find_first_of(" \t") == std::string::npos;
}

void check_steps(const IOSpec& io, const std::string& prefix, Collector& c) {
  for (std::size_t i = 0; i < io.steps.size(); ++i) {
    const auto& step = io.steps[i];
    const std::string f = prefix + ".steps." + std::string(step_name(step));
    if (std::holds_alternative<steps::Decode>(step) && i != 0) {
      c.error(f, "decode must be the first step");
    }
    if (const auto* crop = std::get_if<steps::Crop>(&step)) {
      if (!(crop->percentage > 0.0 && crop->percentage <= 100.0)) {
        c.error(f + ".percentage", "must be in (0, 100]");
      }
      if (crop->method != "center") {
        c.error(f + ".method", "only 'center' cropping is supported");
      }
    } else if (const auto* r = std::get_if<steps::Resize>(&step)) {
      if (r->dimensions.size() != 3) {
        c.error(f + ".dimensions", "expected [C, H, W]");
      } else {
        if (r->dimensions[0] != 3) {
          c.error(f + ".dimensions", "channel count must be 3");
        }
        if (r->dimensions[1] < 1 || r->dimensions[2] < 1) {
          c.error(f + ".dimensions", "height and width must be >= 1");
        }
      }
      if (r->method != "bilinear") {
        c.error(f + ".method", "only 'bilinear' resizing is supported");
      }
    } else if (const auto* m = std::get_if<steps::Mean>(&step)) {
      if (m->values.size() != 1 && m->values.size() != 3) {
        c.error(f, "expected a scalar or one value per channel");
      }
    } else if (const auto* s = std::get_if<steps::Rescale>(&step)) {
      if (s->value == 0.0F) c.error(f, "rescale must be non-zero");
    }
  }
}

void check_io(const std::vector<IOSpec>& specs, const std::string& field,
              bool inputs, Collector& c) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    const auto& io = specs[i];
    if (!io.element_type) c.error(f + ".element_type", "missing element type");
    if (!inputs && !io.steps.empty()) {
      c.error(f + ".steps", "pre-processing steps are only valid on inputs");
    }
    check_steps(io, f, c);
  }
}

bool has_output(const Manifest& m, Modality mod) {
  return std::any_of(m.outputs.begin(), m.outputs.end(),
                     [mod](const IOSpec& io) { return io.modality == mod; });
}

}  // namespace

ValidationReport validate_manifest(const Manifest& m) {
  Collector c;
  if (m.name.empty()) c.error("name", "missing model name");
  if (!m.version) c.error("version", "missing model version");
  if (m.task.empty()) c.error("task", "missing task");
  if (!m.framework) {
    c.error("framework", "missing framework");
  } else {
    if (m.framework->name.empty()) c.error("framework.name", "missing framework name");
    if (!m.framework->constraint) {
      c.error("framework.version", "missing framework version constraint");
    }
  }

  for (const auto& [arch, entry] : m.containers) {
    const std::string f = "container." + std::string(to_string(arch));
    if (entry.single) {
      if (!valid_image_ref(*entry.single)) c.error(f, "expected repository:tag");
    } else if (!entry.cpu && !entry.gpu) {
      c.error(f, "no image for this architecture");
    }
    if (entry.cpu && !valid_image_ref(*entry.cpu)) {
      c.error(f + ".cpu", "expected repository:tag");
    }
    if (entry.gpu && !valid_image_ref(*entry.gpu)) {
      c.error(f + ".gpu", "expected repository:tag");
    }
  }

  for (std::size_t i = 0; i < m.envvars.size(); ++i) {
    if (m.envvars[i].first.empty()) {
      c.error("envvars[" + std::to_string(i) + "]", "empty variable name");
    }
  }

  check_io(m.inputs, "inputs", true, c);
  check_io(m.outputs, "outputs", false, c);

  if (m.task == "classification" && !has_output(m, Modality::kProbability)) {
    c.error("outputs", "classification requires a probability output");
  }
  if (m.task == "object_detection" || m.task == "instance_segmentation") {
    for (auto mod : {Modality::kBox, Modality::kProbability, Modality::kClass}) {
      if (!has_output(m, mod)) {
        c.error("outputs", m.task + " requires a " + std::string(to_string(mod)) +
                               " output");
      }
    }
    if (m.task == "instance_segmentation" && !has_output(m, Modality::kMask)) {
      c.error("outputs", "instance_segmentation requires a mask output");
    }
  }

  if (m.source.weights_path && m.source.graph_path.empty()) {
    c.error("source.graph_path", "weights_path given without graph_path");
  }
  return c.report;
}

ValidationReport validate_document(std::string_view text) {
  ParseOutcome outcome;
  try {
    outcome = parse_manifest_detailed(text);
  } catch (const Error& e) {
    ValidationReport r;
    r.issues.push_back({Severity::kError,
                        e.field().empty() ? "(document)" : e.field(), e.what()});
    return r;
  }
  ValidationReport report = validate_manifest(outcome.manifest);
  Collector notes;
  for (const auto& key : outcome.unknown_keys) {
    if (key == "pre-processing" || key == "post-processing") {
      notes.warning(key, "embedded scripts are kept as metadata and not executed");
    } else {
      notes.warning(key, "unknown top-level key kept as an attribute");
    }
  }
  for (std::size_t i = 0; i < outcome.manifest.inputs.size(); ++i) {
    for (const auto& step : outcome.manifest.inputs[i].steps) {
      if (const auto* d = std::get_if<steps::Decode>(&step); d && d->declared_int8) {
        notes.warning("inputs[" + std::to_string(i) + "].steps.decode.element_type",
                      "int8 decode is treated as uint8 image bytes");
      }
    }
  }
  report.issues.insert(report.issues.end(), notes.report.issues.begin(),
                       notes.report.issues.end());
  return report;
}

}  // namespace evalmesh::manifest
