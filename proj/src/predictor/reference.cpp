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

#include "evalmesh/predictor/reference.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "evalmesh/common/error.hpp"
#include "evalmesh/common/strings.hpp"
#include "evalmesh/predictor/weights.hpp"

namespace evalmesh::predictor {

using pipeline::Tensor;
using tracer::ScopedSpan;
using tracer::TraceLevel;

namespace {

float value_at(const Tensor& t, std::size_t i) {
  return t.element_type == ElementType::kUInt8 ? static_cast<float>(t.u8[i]) : t.f32[i];
}

std::int64_t batch_of(const Tensor& t) {
  if (t.shape.size() != 4 || t.shape[0] < 1) {
    throw Error(ErrorCode::kShapeMismatch, "predict expects a rank-4 batch with N >= 1");
  }
  return t.shape[0];
}

class ChannelMeanModel final : public Model {
 public:
  std::size_t parameter_count() const override { return 0; }
  std::vector<std::string> layers() const override { return {"channel_mean", "softmax"}; }
  std::size_t classes(const Tensor& batch) const override {
    return static_cast<std::size_t>(pipeline::image_dims(batch).c);
  }

  std::vector<float> forward(const Tensor& batch, const tracer::TraceContext& trace,
                             tracer::SpanId parent) override {
    const auto d = pipeline::image_dims(batch);
    const bool nchw = batch.layout == DataLayout::kNCHW;
    std::vector<float> out;
    for (std::int64_t n = 0; n < d.n; ++n) {
      std::vector<float> means(static_cast<std::size_t>(d.c));
      {
        ScopedSpan span(trace, parent, TraceLevel::kLayer, "channel_mean");
        for (std::int64_t c = 0; c < d.c; ++c) {
          double sum = 0.0;
          for (std::int64_t h = 0; h < d.h; ++h) {
            for (std::int64_t w = 0; w < d.w; ++w) {
              const auto i = nchw ? ((n * d.c + c) * d.h + h) * d.w + w
                                  : ((n * d.h + h) * d.w + w) * d.c + c;
              sum += value_at(batch, static_cast<std::size_t>(i));
            }
          }
          means[c] = static_cast<float>(sum / static_cast<double>(d.h * d.w));
        }
      }
      ScopedSpan span(trace, parent, TraceLevel::kLayer, "softmax");
      const auto p = softmax(means);
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }
};

class LinearModel final : public Model {
 public:
  explicit LinearModel(LinearWeights weights) : lw_(std::move(weights)) {}

  std::size_t parameter_count() const override { return lw_.parameter_count(); }
  std::vector<std::string> layers() const override { return {"dense", "softmax"}; }
  std::size_t classes(const Tensor&) const override { return lw_.rows; }

  std::vector<float> forward(const Tensor& batch, const tracer::TraceContext& trace,
                             tracer::SpanId parent) override {
    const auto n = batch_of(batch);
    const auto per = batch.element_count() / static_cast<std::size_t>(n);
    if (per != lw_.cols) {
      throw Error(ErrorCode::kShapeMismatch, "item has " + std::to_string(per) +
                                                 " features, weights expect " +
                                                 std::to_string(lw_.cols));
    }
    std::vector<float> out;
    for (std::int64_t item = 0; item < n; ++item) {
      std::vector<float> logits(lw_.rows);
      {
        ScopedSpan span(trace, parent, TraceLevel::kLayer, "dense");
        const std::size_t base = static_cast<std::size_t>(item) * per;
        for (std::uint32_t r = 0; r < lw_.rows; ++r) {
          double acc = lw_.bias[r];
          for (std::uint32_t j = 0; j < lw_.cols; ++j) {
            acc += static_cast<double>(lw_.w[static_cast<std::size_t>(r) * lw_.cols + j]) *
                   value_at(batch, base + j);
          }
          logits[r] = static_cast<float>(acc);
        }
      }
      ScopedSpan span(trace, parent, TraceLevel::kLayer, "softmax");
      const auto p = softmax(logits);
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

 private:
  LinearWeights lw_;
};

class SyntheticProfileModel final : public Model {
 public:
  struct Kernel {
    std::string name;
    std::int64_t duration_us;
  };
  struct Layer {
    std::string name;
    std::int64_t duration_us;
    std::vector<Kernel> kernels;
  };

  SyntheticProfileModel(std::vector<Layer> layers, std::size_t classes, Clock& clock)
      : layers_(std::move(layers)), classes_(classes), clock_(clock) {}

  std::size_t parameter_count() const override { return 0; }
  std::vector<std::string> layers() const override {
    std::vector<std::string> names;
    for (const auto& l : layers_) names.push_back(l.name);
    return names;
  }
  std::size_t classes(const Tensor&) const override { return classes_; }

  std::vector<float> forward(const Tensor& batch, const tracer::TraceContext& trace,
                             tracer::SpanId parent) override {
    const auto n = batch_of(batch);
    for (const auto& layer : layers_) {
      ScopedSpan span(trace, parent, TraceLevel::kLayer, layer.name);
      const auto start = clock_.now_us();
      for (const auto& k : layer.kernels) {
        ScopedSpan ks(trace, span.id(), TraceLevel::kLibrary, k.name);
        clock_.sleep_for_us(k.duration_us);
      }
      clock_.sleep_for_us(layer.duration_us - (clock_.now_us() - start));
    }
    return std::vector<float>(static_cast<std::size_t>(n) * classes_,
                              1.0F / static_cast<float>(classes_));
  }

 private:
  std::vector<Layer> layers_;
  std::size_t classes_;
  Clock& clock_;
};

std::unique_ptr<Model> load_synthetic(const std::string& path, Clock& clock) {
  nlohmann::json graph;
  try {
    const auto bytes = read_file_bytes(path);
    graph = nlohmann::json::parse(bytes.begin(), bytes.end());
    std::vector<SyntheticProfileModel::Layer> layers;
    for (const auto& l : graph.at("layers")) {
      SyntheticProfileModel::Layer layer{l.at("name").get<std::string>(),
                                         l.at("duration_us").get<std::int64_t>(), {}};
      std::int64_t kernel_total = 0;
      for (const auto& k : l.value("kernels", nlohmann::json::array())) {
        layer.kernels.push_back(
            {k.at("name").get<std::string>(), k.at("duration_us").get<std::int64_t>()});
        kernel_total += layer.kernels.back().duration_us;
        if (layer.kernels.back().duration_us < 0) {
          throw Error(ErrorCode::kBadWeights, "negative kernel duration");
        }
      }
      if (layer.duration_us < 0 || kernel_total > layer.duration_us) {
        throw Error(ErrorCode::kBadWeights,
                    "layer " + layer.name + " kernels exceed the layer duration");
      }
      layers.push_back(std::move(layer));
    }
    const auto classes = graph.value("classes", std::size_t{10});
    if (classes == 0) throw Error(ErrorCode::kBadWeights, "graph declares zero classes");
    return std::make_unique<SyntheticProfileModel>(std::move(layers), classes, clock);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadWeights, std::string("bad profile graph: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBadWeights) throw;
    throw Error(ErrorCode::kBadWeights, e.what());
  }
}

}  // namespace

std::string_view to_string(Device d) { return d == Device::kCpu ? "cpu" : "gpu"; }

std::optional<Device> parse_device(std::string_view s) {
  if (iequals(s, "cpu")) return Device::kCpu;
  if (iequals(s, "gpu")) return Device::kGpuSimulated;
  return std::nullopt;
}

std::vector<float> softmax(std::span<const float> logits) {
  if (logits.empty()) return {};
  const float m = *std::max_element(logits.begin(), logits.end());
  std::vector<float> out(logits.size());
  float sum = 0.0F;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

std::unique_ptr<Model> make_model(const OpenRequest& req, Clock& clock) {
  const auto& attrs = req.manifest.attributes;
  const auto it = attrs.find("architecture");
  if (it == attrs.end()) {
    throw Error(ErrorCode::kBadWeights, "manifest does not name a reference architecture",
                "architecture");
  }
  const auto arch = to_lower(it->second);
  if (arch == "channel_mean") return std::make_unique<ChannelMeanModel>();
  if (arch == "linear_softmax") {
    const auto& path = req.source.weights_path ? *req.source.weights_path : req.source.graph_path;
    std::vector<std::uint8_t> bytes;
    try {
      bytes = read_file_bytes(path);
    } catch (const Error& e) {
      throw Error(ErrorCode::kBadWeights, e.what());
    }
    return std::make_unique<LinearModel>(decode_weights(bytes));
  }
  if (arch == "synthetic_profile") return load_synthetic(req.source.graph_path, clock);
  throw Error(ErrorCode::kBadWeights, "unknown reference architecture " + it->second,
              "architecture");
}

ReferencePredictor::ReferencePredictor(Options options)
    : options_(std::move(options)),
      clock_(options_.clock != nullptr ? *options_.clock : MonotonicClock::instance()) {}

ModelHandle ReferencePredictor::model_load(const OpenRequest& req) {
  const auto& fw = req.manifest.framework;
  if (!fw || !iequals(fw->name, kReferenceFramework) ||
      (fw->constraint && !fw->constraint->matches(options_.version))) {
    throw Error(ErrorCode::kNoPredictorForFramework,
                "refnn " + options_.version.to_string() + " cannot serve " +
                    (fw ? fw->name + " " + (fw->constraint ? fw->constraint->raw() : "*")
                        : std::string("a manifest without framework")));
  }
  if (req.device == Device::kGpuSimulated && !options_.gpu_available) {
    throw Error(ErrorCode::kDeviceUnavailable, "no gpu on this agent");
  }
  if (req.batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");

  ScopedSpan span(req.trace, req.parent, TraceLevel::kFramework, "model_load");
  auto slot = std::make_shared<Slot>();
  slot->model = make_model(req, clock_);
  slot->manifest = req.manifest;
  slot->handle.manifest_key = req.manifest_key;
  slot->handle.parameter_count = slot->model->parameter_count();
  slot->handle.layers = slot->model->layers();
  std::unique_lock lock(mu_);
  slot->handle.id = next_id_++;
  slots_.emplace(slot->handle.id, slot);
  return slot->handle;
}

std::shared_ptr<ReferencePredictor::Slot> ReferencePredictor::lookup(HandleId id) const {
  std::shared_lock lock(mu_);
  const auto it = slots_.find(id);
  if (it == slots_.end()) {
    throw Error(ErrorCode::kClosedHandle, "handle " + std::to_string(id) + " is not open");
  }
  return it->second;
}

PredictionResponse ReferencePredictor::predict(const PredictRequest& req) {
  auto slot = lookup(req.handle);
  std::shared_lock busy(slot->busy);
  if (slot->closed) {
    throw Error(ErrorCode::kClosedHandle, "handle " + std::to_string(req.handle) + " is closed");
  }
  const auto& batch = req.batch;
  batch.check();
  const auto n = batch_of(batch);
  if (!slot->manifest.inputs.empty()) {
    const auto& in = slot->manifest.inputs.front();
    if (in.element_type && *in.element_type != batch.element_type) {
      throw Error(ErrorCode::kShapeMismatch, "batch element type differs from the input spec");
    }
    if (in.layout && *in.layout != batch.layout) {
      throw Error(ErrorCode::kShapeMismatch, "batch layout differs from the input spec");
    }
  }

  ScopedSpan span(req.trace, req.parent, TraceLevel::kFramework, "predict");
  const auto probs = slot->model->forward(batch, req.trace, span.id());
  const auto k = probs.size() / static_cast<std::size_t>(n);

  PredictionResponse resp;
  for (const auto& out : slot->manifest.outputs) {
    switch (out.modality) {
      case manifest::Modality::kProbability:
        resp.outputs.push_back(pipeline::make_f32({n, static_cast<std::int64_t>(k)},
                                                  DataLayout::kNHWC, probs));
        break;
      case manifest::Modality::kClass: {
        std::vector<float> cls;
        for (std::int64_t i = 0; i < n; ++i) {
          const auto* row = probs.data() + static_cast<std::size_t>(i) * k;
          cls.push_back(static_cast<float>(std::max_element(row, row + k) - row));
        }
        resp.outputs.push_back(pipeline::make_f32({n, 1}, DataLayout::kNHWC, std::move(cls)));
        break;
      }
      default:
        throw Error(ErrorCode::kInvalidArgument,
                    "reference predictors cannot produce " +
                        std::string(manifest::to_string(out.modality)) + " outputs");
    }
  }
  return resp;
}

void ReferencePredictor::model_unload(HandleId handle) {
  std::shared_ptr<Slot> slot;
  {
    std::unique_lock lock(mu_);
    const auto it = slots_.find(handle);
    if (it == slots_.end()) {
      throw Error(ErrorCode::kClosedHandle, "handle " + std::to_string(handle) + " is not open");
    }
    slot = it->second;
    slots_.erase(it);
  }
  std::unique_lock busy(slot->busy);
  slot->closed = true;
  slot->model.reset();
}

std::size_t ReferencePredictor::open_handles() const {
  std::shared_lock lock(mu_);
  return slots_.size();
}

std::vector<manifest::SemVer> reference_versions() {
  return {{1, 10, 0, {}}, {1, 11, 0, {}}, {1, 12, 0, {}}, {1, 13, 0, {}}};
}

void register_reference_predictors(PredictorRegistry& registry,
                                   std::vector<manifest::SemVer> versions, bool gpu_available,
                                   Clock* clock) {
  if (versions.empty()) versions = reference_versions();
  for (auto& v : versions) {
    ReferencePredictor::Options opts{v, gpu_available, clock};
    registry.add(std::string(kReferenceFramework), v,
                 std::make_shared<ReferencePredictor>(opts));
  }
}

}  // namespace evalmesh::predictor
