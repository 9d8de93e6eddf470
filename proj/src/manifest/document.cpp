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

#include "evalmesh/manifest/document.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <set>

#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"

namespace evalmesh::manifest {

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::kSchemaError, field + ": " + msg, field);
}

std::string scalar(const YAML::Node& node, const std::string& field) {
  if (node.IsNull()) return {};
  if (!node.IsScalar()) schema_error(field, "expected a scalar value");
  return node.Scalar();
}

double number(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) schema_error(field, "expected a number");
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    schema_error(field, "expected a number, got '" + node.Scalar() + "'");
  }
}

bool boolean(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) schema_error(field, "expected a boolean");
  try {
    return node.as<bool>();
  } catch (const YAML::Exception&) {
    schema_error(field, "expected a boolean, got '" + node.Scalar() + "'");
  }
}

void require_map(const YAML::Node& node, const std::string& field) {
  if (!node.IsMap()) schema_error(field, "expected a mapping");
}

std::string flow_text(const YAML::Node& node) {
  YAML::Emitter out;
  out << YAML::Flow << node;
  return out.c_str();
}

void flatten_into(const YAML::Node& node, const std::string& prefix,
                  std::map<std::string, std::string>& attrs) {
  if (node.IsMap()) {
    if (node.size() == 0) {
      attrs[prefix] = "{}";
      return;
    }
    for (const auto& kv : node) {
      std::string key = kv.first.Scalar();
      flatten_into(kv.second, prefix.empty() ? key : prefix + "." + key, attrs);
    }
  } else if (node.IsSequence()) {
    attrs[prefix] = flow_text(node);
  } else if (node.IsNull()) {
    attrs[prefix] = "";
  } else {
    attrs[prefix] = node.Scalar();
  }
}

template <typename T, typename Parser>
T enum_field(const YAML::Node& node, const std::string& field, Parser parse,
             const char* what) {
  auto text = scalar(node, field);
  auto value = parse(text);
  if (!value) schema_error(field, std::string("unknown ") + what + " '" + text + "'");
  return *value;
}

LayerName parse_layer_name(const YAML::Node& node, const std::string& field) {
  std::string text = scalar(node, field);
  if (node.Tag() == "!") return text;  // quoted scalar stays a name
  std::int64_t idx = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), idx);
  if (!text.empty() && ec == std::errc() && ptr == text.data() + text.size()) {
    return idx;
  }
  return text;
}

PipelineStep parse_step(const std::string& name, const YAML::Node& body,
                        const std::string& field) {
  const std::string key = to_lower(name);
  if (key == "decode") {
    steps::Decode d;
    if (!body.IsNull()) {
      require_map(body, field);
      if (body["element_type"]) {
        auto text = scalar(body["element_type"], field + ".element_type");
        d.declared_int8 = iequals(text, "int8");
        d.element_type = enum_field<ElementType>(
            body["element_type"], field + ".element_type", parse_element_type,
            "element type");
      }
      if (body["data_layout"]) {
        d.data_layout = enum_field<DataLayout>(
            body["data_layout"], field + ".data_layout", parse_data_layout,
            "data layout");
      }
      if (body["color_layout"]) {
        d.color_layout = enum_field<ColorLayout>(
            body["color_layout"], field + ".color_layout", parse_color_layout,
            "color layout");
      }
    }
    return d;
  }
  if (key == "crop") {
    steps::Crop c;
    require_map(body, field);
    if (body["method"]) c.method = scalar(body["method"], field + ".method");
    if (!body["percentage"]) schema_error(field + ".percentage", "missing");
    c.percentage = number(body["percentage"], field + ".percentage");
    return c;
  }
  if (key == "resize") {
    steps::Resize r;
    require_map(body, field);
    const auto dims = body["dimensions"];
    if (!dims || !dims.IsSequence()) {
      schema_error(field + ".dimensions", "expected a list [C, H, W]");
    }
    for (std::size_t i = 0; i < dims.size(); ++i) {
      std::string f = field + ".dimensions[" + std::to_string(i) + "]";
      double v = number(dims[i], f);
      if (v != static_cast<double>(static_cast<std::int64_t>(v))) {
        schema_error(f, "expected an integer");
      }
      r.dimensions.push_back(static_cast<std::int64_t>(v));
    }
    if (body["method"]) r.method = scalar(body["method"], field + ".method");
    if (body["keep_aspect_ratio"]) {
      r.keep_aspect_ratio =
          boolean(body["keep_aspect_ratio"], field + ".keep_aspect_ratio");
    }
    return r;
  }
  if (key == "mean") {
    steps::Mean m;
    if (body.IsSequence()) {
      for (std::size_t i = 0; i < body.size(); ++i) {
        m.values.push_back(static_cast<float>(
            number(body[i], field + "[" + std::to_string(i) + "]")));
      }
    } else {
      m.values.push_back(static_cast<float>(number(body, field)));
    }
    return m;
  }
  if (key == "rescale") {
    return steps::Rescale{static_cast<float>(number(body, field))};
  }
  if (key == "layout" || key == "data_layout") {
    return steps::LayoutConvert{enum_field<DataLayout>(
        body, field, parse_data_layout, "data layout")};
  }
  if (key == "cast_float" || key == "to_float") return steps::CastFloat{};
  if (key == "cast_byte" || key == "to_byte") return steps::CastByte{};
  schema_error(field, "unknown pre-processing step '" + name + "'");
}

std::vector<PipelineStep> parse_steps(const YAML::Node& node,
                                      const std::string& field) {
  std::vector<PipelineStep> out;
  if (node.IsNull()) return out;
  if (node.IsMap()) {
    for (const auto& kv : node) {
      std::string name = kv.first.Scalar();
      out.push_back(parse_step(name, kv.second, field + "." + name));
    }
    return out;
  }
  if (node.IsSequence()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      std::string f = field + "[" + std::to_string(i) + "]";
      const auto item = node[i];
      if (item.IsScalar()) {
        out.push_back(parse_step(item.Scalar(), YAML::Node(), f + "." + item.Scalar()));
        continue;
      }
      if (!item.IsMap() || item.size() != 1) {
        schema_error(f, "expected a single-key step mapping");
      }
      auto kv = *item.begin();
      std::string name = kv.first.Scalar();
      out.push_back(parse_step(name, kv.second, f + "." + name));
    }
    return out;
  }
  schema_error(field, "expected a mapping or list of steps");
}

std::vector<IOSpec> parse_io(const YAML::Node& node, const std::string& field,
                             std::map<std::string, std::string>& attrs) {
  std::vector<IOSpec> out;
  if (node.IsNull()) return out;
  if (!node.IsSequence()) schema_error(field, "expected a list");
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    const auto item = node[i];
    require_map(item, f);
    IOSpec spec;
    for (const auto& kv : item) {
      const std::string key = kv.first.Scalar();
      const std::string kf = f + "." + key;
      const auto& v = kv.second;
      if (key == "type") {
        spec.modality = enum_field<Modality>(v, kf, parse_modality, "modality");
      } else if (key == "layer_name") {
        spec.layer_name = parse_layer_name(v, kf);
      } else if (key == "element_type") {
        spec.element_type =
            enum_field<ElementType>(v, kf, parse_element_type, "element type");
      } else if (key == "layout" || key == "data_layout") {
        spec.layout = enum_field<DataLayout>(v, kf, parse_data_layout, "data layout");
      } else if (key == "color_layout") {
        spec.color_layout =
            enum_field<ColorLayout>(v, kf, parse_color_layout, "color layout");
      } else if (key == "features_url") {
        spec.features_url = scalar(v, kf);
      } else if (key == "steps") {
        spec.steps = parse_steps(v, f + ".steps");
      } else {
        flatten_into(v, kf, attrs);
      }
    }
    out.push_back(std::move(spec));
  }
  return out;
}

ContainerMap parse_containers(const YAML::Node& node, const std::string& field) {
  ContainerMap out;
  if (node.IsNull()) return out;
  require_map(node, field);
  for (const auto& kv : node) {
    const std::string arch_name = kv.first.Scalar();
    const std::string f = field + "." + arch_name;
    auto arch = parse_architecture(arch_name);
    if (!arch) schema_error(f, "unknown architecture '" + arch_name + "'");
    ContainerEntry entry;
    if (kv.second.IsScalar()) {
      entry.single = kv.second.Scalar();
    } else {
      require_map(kv.second, f);
      for (const auto& acc : kv.second) {
        const std::string acc_name = acc.first.Scalar();
        auto kind = parse_accelerator(acc_name);
        if (!kind) schema_error(f + "." + acc_name, "expected cpu or gpu");
        auto image = scalar(acc.second, f + "." + acc_name);
        (*kind == Accelerator::kCpu ? entry.cpu : entry.gpu) = image;
      }
    }
    out[*arch] = entry;
  }
  return out;
}

const std::set<std::string> kKnownKeys = {
    "name",    "version", "task",    "license", "description", "framework",
    "container", "containers", "envvars", "inputs", "outputs", "source",
    "attributes"};

}  // namespace

ParseOutcome parse_manifest_detailed(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::kSyntaxError,
                "line " + std::to_string(e.mark.line + 1) + ": " + e.msg,
                "(document)");
  }
  if (!root.IsMap()) {
    throw Error(ErrorCode::kSchemaError,
                "(document): manifest must be a mapping", "(document)");
  }

  ParseOutcome result;
  Manifest& m = result.manifest;
  for (const auto& kv : root) {
    const std::string key = kv.first.Scalar();
    const auto& v = kv.second;
    if (key == "name") {
      m.name = scalar(v, key);
    } else if (key == "version") {
      auto text_v = scalar(v, key);
      if (!text_v.empty()) {
        try {
          m.version = SemVer::parse(text_v);
        } catch (const Error& e) {
          schema_error(key, e.what());
        }
      }
    } else if (key == "task") {
      m.task = scalar(v, key);
    } else if (key == "license") {
      m.license = scalar(v, key);
    } else if (key == "description") {
      m.description = scalar(v, key);
    } else if (key == "framework") {
      if (v.IsNull()) continue;
      require_map(v, key);
      FrameworkSpec fw;
      for (const auto& f : v) {
        const std::string fk = f.first.Scalar();
        if (fk == "name") {
          fw.name = scalar(f.second, "framework.name");
        } else if (fk == "version") {
          auto c = scalar(f.second, "framework.version");
          if (c.empty()) continue;
          try {
            fw.constraint = VersionConstraint::parse(c);
          } catch (const Error& e) {
            schema_error("framework.version", e.what());
          }
        } else {
          flatten_into(f.second, "framework." + fk, m.attributes);
        }
      }
      m.framework = std::move(fw);
    } else if (key == "container" || key == "containers") {
      m.containers = parse_containers(v, key);
    } else if (key == "envvars") {
      if (v.IsNull()) continue;
      if (v.IsMap()) {
        for (const auto& e : v) {
          m.envvars.emplace_back(e.first.Scalar(),
                                 scalar(e.second, "envvars." + e.first.Scalar()));
        }
      } else if (v.IsSequence()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          const std::string f = "envvars[" + std::to_string(i) + "]";
          require_map(v[i], f);
          for (const auto& e : v[i]) {
            m.envvars.emplace_back(e.first.Scalar(),
                                   scalar(e.second, f + "." + e.first.Scalar()));
          }
        }
      } else {
        schema_error(key, "expected a list of NAME: value entries");
      }
    } else if (key == "inputs") {
      m.inputs = parse_io(v, key, m.attributes);
    } else if (key == "outputs") {
      m.outputs = parse_io(v, key, m.attributes);
    } else if (key == "source") {
      if (v.IsNull()) continue;
      require_map(v, key);
      for (const auto& s : v) {
        const std::string sk = s.first.Scalar();
        const std::string f = "source." + sk;
        if (sk == "graph_path") {
          m.source.graph_path = scalar(s.second, f);
        } else if (sk == "weights_path") {
          m.source.weights_path = scalar(s.second, f);
        } else if (sk == "base_url") {
          m.source.base_url = scalar(s.second, f);
        } else if (sk == "graph_checksum") {
          m.source.graph_checksum = scalar(s.second, f);
        } else if (sk == "weights_checksum") {
          m.source.weights_checksum = scalar(s.second, f);
        } else {
          flatten_into(s.second, f, m.attributes);
        }
      }
    } else if (key == "attributes") {
      if (v.IsNull()) continue;
      require_map(v, key);
      flatten_into(v, "", m.attributes);
    } else {
      result.unknown_keys.push_back(key);
      flatten_into(v, key, m.attributes);
    }
  }
  return result;
}

Manifest parse_manifest(std::string_view text) {
  return parse_manifest_detailed(text).manifest;
}

namespace {

void emit_step(YAML::Emitter& out, const PipelineStep& step) {
  out << YAML::BeginMap << YAML::Key << std::string(step_name(step))
      << YAML::Value;
  std::visit(
      [&out](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, steps::Decode>) {
          out << YAML::BeginMap;
          out << YAML::Key << "element_type" << YAML::Value
              << (s.declared_int8 ? std::string("int8")
                                  : std::string(to_string(s.element_type)));
          out << YAML::Key << "data_layout" << YAML::Value
              << std::string(to_string(s.data_layout));
          out << YAML::Key << "color_layout" << YAML::Value
              << std::string(to_string(s.color_layout));
          out << YAML::EndMap;
        } else if constexpr (std::is_same_v<T, steps::Crop>) {
          out << YAML::BeginMap << YAML::Key << "method" << YAML::Value
              << s.method << YAML::Key << "percentage" << YAML::Value
              << s.percentage << YAML::EndMap;
        } else if constexpr (std::is_same_v<T, steps::Resize>) {
          out << YAML::BeginMap << YAML::Key << "dimensions" << YAML::Value
              << YAML::Flow << s.dimensions << YAML::Key << "method"
              << YAML::Value << s.method << YAML::Key << "keep_aspect_ratio"
              << YAML::Value << s.keep_aspect_ratio << YAML::EndMap;
        } else if constexpr (std::is_same_v<T, steps::Mean>) {
          out << YAML::Flow << s.values;
        } else if constexpr (std::is_same_v<T, steps::Rescale>) {
          out << s.value;
        } else if constexpr (std::is_same_v<T, steps::LayoutConvert>) {
          out << std::string(to_string(s.target));
        } else {
          out << YAML::Null;
        }
      },
      step);
  out << YAML::EndMap;
}

void emit_io(YAML::Emitter& out, const std::vector<IOSpec>& specs) {
  out << YAML::BeginSeq;
  for (const auto& io : specs) {
    out << YAML::BeginMap;
    out << YAML::Key << "type" << YAML::Value << std::string(to_string(io.modality));
    if (io.layer_name) {
      out << YAML::Key << "layer_name" << YAML::Value;
      if (const auto* idx = std::get_if<std::int64_t>(&*io.layer_name)) {
        out << *idx;
      } else {
        // Quote so a numeric-looking name is not re-read as an index.
        out << YAML::DoubleQuoted << std::get<std::string>(*io.layer_name);
      }
    }
    if (io.element_type) {
      out << YAML::Key << "element_type" << YAML::Value
          << std::string(to_string(*io.element_type));
    }
    if (io.layout) {
      out << YAML::Key << "layout" << YAML::Value << std::string(to_string(*io.layout));
    }
    if (io.color_layout) {
      out << YAML::Key << "color_layout" << YAML::Value
          << std::string(to_string(*io.color_layout));
    }
    if (io.features_url) {
      out << YAML::Key << "features_url" << YAML::Value << *io.features_url;
    }
    if (!io.steps.empty()) {
      out << YAML::Key << "steps" << YAML::Value << YAML::BeginSeq;
      for (const auto& s : io.steps) emit_step(out, s);
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
}

void emit_string(YAML::Emitter& out, const std::string& key, const std::string& v) {
  out << YAML::Key << key << YAML::Value << YAML::DoubleQuoted << v;
}

}  // namespace

std::string render_manifest(const Manifest& m) {
  YAML::Emitter out;
  out.SetFloatPrecision(9);
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  emit_string(out, "name", m.name);
  if (m.version) emit_string(out, "version", m.version->to_string());
  emit_string(out, "task", m.task);
  emit_string(out, "license", m.license);
  emit_string(out, "description", m.description);
  if (m.framework) {
    out << YAML::Key << "framework" << YAML::Value << YAML::BeginMap;
    emit_string(out, "name", m.framework->name);
    if (m.framework->constraint) {
      emit_string(out, "version", m.framework->constraint->raw());
    }
    out << YAML::EndMap;
  }
  if (!m.containers.empty()) {
    out << YAML::Key << "container" << YAML::Value << YAML::BeginMap;
    for (const auto& [arch, entry] : m.containers) {
      out << YAML::Key << std::string(to_string(arch)) << YAML::Value;
      if (entry.single) {
        out << *entry.single;
      } else {
        out << YAML::BeginMap;
        if (entry.cpu) out << YAML::Key << "cpu" << YAML::Value << *entry.cpu;
        if (entry.gpu) out << YAML::Key << "gpu" << YAML::Value << *entry.gpu;
        out << YAML::EndMap;
      }
    }
    out << YAML::EndMap;
  }
  if (!m.envvars.empty()) {
    out << YAML::Key << "envvars" << YAML::Value << YAML::BeginSeq;
    for (const auto& [k, v] : m.envvars) {
      out << YAML::BeginMap;
      emit_string(out, k, v);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  if (!m.inputs.empty()) {
    out << YAML::Key << "inputs" << YAML::Value;
    emit_io(out, m.inputs);
  }
  if (!m.outputs.empty()) {
    out << YAML::Key << "outputs" << YAML::Value;
    emit_io(out, m.outputs);
  }
  const Source& s = m.source;
  if (!s.graph_path.empty() || s.weights_path || s.base_url || s.graph_checksum ||
      s.weights_checksum) {
    out << YAML::Key << "source" << YAML::Value << YAML::BeginMap;
    if (s.base_url) emit_string(out, "base_url", *s.base_url);
    if (!s.graph_path.empty()) emit_string(out, "graph_path", s.graph_path);
    if (s.weights_path) emit_string(out, "weights_path", *s.weights_path);
    if (s.graph_checksum) emit_string(out, "graph_checksum", *s.graph_checksum);
    if (s.weights_checksum) emit_string(out, "weights_checksum", *s.weights_checksum);
    out << YAML::EndMap;
  }
  if (!m.attributes.empty()) {
    out << YAML::Key << "attributes" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : m.attributes) emit_string(out, k, v);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace evalmesh::manifest
