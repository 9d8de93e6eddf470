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

#include <gtest/gtest.h>

#include <random>

#include "evalmesh/common/error.hpp"
#include "evalmesh/manifest/document.hpp"
#include "evalmesh/manifest/selection.hpp"
#include "evalmesh/manifest/validate.hpp"
#include "test_support.hpp"

namespace evalmesh::manifest {
namespace {

using evalmesh::testing::read_fixture;

constexpr const char* kMinimal = R"(
name: Tiny
version: 0.1.0
task: classification
framework:
  name: refnn
  version: ^1.x
)";

TEST(ParseManifestTest, InceptionFixture) {
  Manifest m = parse_manifest(read_fixture("manifests/inception_v3.yml"));
  EXPECT_EQ(m.name, "Inception-v3");
  EXPECT_EQ(m.version->to_string(), "1.0.0");
  EXPECT_EQ(m.task, "classification");
  EXPECT_EQ(m.license, "MIT");
  ASSERT_TRUE(m.framework);
  EXPECT_EQ(m.framework->name, "TensorFlow");
  EXPECT_EQ(*m.framework->constraint, VersionConstraint::caret(1));
  EXPECT_EQ(m.containers.size(), 3U);
  ASSERT_EQ(m.envvars.size(), 1U);
  EXPECT_EQ(m.envvars[0].first, "TF_ENABLE_WINOGRAD_NONFUSED");
  EXPECT_EQ(m.envvars[0].second, "0");
  ASSERT_EQ(m.inputs.size(), 1U);
  EXPECT_EQ(m.inputs[0].modality, Modality::kImage);
  EXPECT_EQ(std::get<std::string>(*m.inputs[0].layer_name), "data");
  ASSERT_EQ(m.outputs.size(), 1U);
  EXPECT_EQ(m.outputs[0].modality, Modality::kProbability);
  EXPECT_EQ(m.source.graph_path, "https://.../inception_v3.pb");
  EXPECT_FALSE(m.source.weights_path);
  EXPECT_EQ(m.attributes.at("training_dataset.name"), "ILSVRC 2012");
  EXPECT_EQ(m.attributes.at("training_dataset.version"), "1.0.0");
  EXPECT_TRUE(m.attributes.contains("pre-processing"));
}

TEST(ParseManifestTest, MinimalDocumentDefaults) {
  Manifest m = parse_manifest(kMinimal);
  EXPECT_EQ(m.name, "Tiny");
  EXPECT_TRUE(m.containers.empty());
  EXPECT_TRUE(m.attributes.empty());
  EXPECT_TRUE(m.inputs.empty());
  EXPECT_TRUE(m.source.graph_path.empty());
}

TEST(ParseManifestTest, IntegerLayerIndices) {
  Manifest m = parse_manifest(read_fixture("manifests/mask_rcnn_resnet50_v2_atrous_coco.yml"));
  ASSERT_EQ(m.outputs.size(), 4U);
  for (std::int64_t i = 0; i < 3; ++i) {
    EXPECT_EQ(std::get<std::int64_t>(*m.outputs[i].layer_name), i);
  }
  EXPECT_FALSE(m.outputs[3].layer_name);
  EXPECT_EQ(m.version->to_string(), "1.0.0");
  EXPECT_EQ(m.inputs[0].layout, DataLayout::kNHWC);
  EXPECT_EQ(resolve_source_url(m.source, *m.source.weights_path),
            "http://.../mxnet/Mask_RCNN_ResNet50_v2_Atrous_COCO/model-0000.params");
}

TEST(ParseManifestTest, StepsKeepDocumentOrder) {
  Manifest m = parse_manifest(read_fixture("manifests/inception_v3_steps.yml"));
  const auto& steps = m.inputs.at(0).steps;
  ASSERT_EQ(steps.size(), 5U);
  EXPECT_EQ(step_name(steps[0]), "decode");
  EXPECT_EQ(step_name(steps[1]), "crop");
  EXPECT_EQ(step_name(steps[2]), "resize");
  EXPECT_EQ(step_name(steps[3]), "mean");
  EXPECT_EQ(step_name(steps[4]), "rescale");
  const auto& decode = std::get<steps::Decode>(steps[0]);
  EXPECT_EQ(decode.element_type, ElementType::kUInt8);
  EXPECT_TRUE(decode.declared_int8);
  EXPECT_DOUBLE_EQ(std::get<steps::Crop>(steps[1]).percentage, 87.5);
  const auto& resize = std::get<steps::Resize>(steps[2]);
  EXPECT_EQ(resize.dimensions, (std::vector<std::int64_t>{3, 299, 299}));
  EXPECT_TRUE(resize.keep_aspect_ratio);
  EXPECT_EQ(std::get<steps::Mean>(steps[3]).values,
            (std::vector<float>{127.5F, 127.5F, 127.5F}));
  EXPECT_EQ(std::get<steps::Rescale>(steps[4]).value, 127.5F);
}

TEST(ParseManifestTest, SequenceStepsAllowRepeats) {
  Manifest m = parse_manifest(std::string(kMinimal) + R"(
inputs:
  - type: image
    element_type: float32
    steps:
      - decode: {color_layout: BGR}
      - cast_float
      - cast_byte
      - cast_float
      - layout: NCHW
)");
  const auto& steps = m.inputs[0].steps;
  ASSERT_EQ(steps.size(), 5U);
  EXPECT_EQ(std::get<steps::Decode>(steps[0]).color_layout, ColorLayout::kBGR);
  EXPECT_EQ(std::get<steps::LayoutConvert>(steps[4]).target, DataLayout::kNCHW);
}

TEST(ParseManifestTest, SyntaxAndSchemaErrorsCarryFields) {
  try {
    parse_manifest("name: [unclosed");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSyntaxError);
  }
  try {
    parse_manifest(std::string(kMinimal) +
                   "inputs:\n  - type: image\n    steps:\n      crop: {percentage: lots}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
    EXPECT_EQ(e.field(), "inputs[0].steps.crop.percentage");
  }
}

TEST(ValidateManifestTest, MissingFrameworkName) {
  auto report = validate_manifest(parse_manifest(R"(
name: X
version: 1.0.0
task: raw
framework:
  version: ^1.x
)"));
  ASSERT_EQ(report.issues.size(), 1U);
  EXPECT_EQ(report.issues[0].severity, Severity::kError);
  EXPECT_EQ(report.issues[0].field, "framework.name");
}

TEST(ValidateManifestTest, CropOutOfRange) {
  auto report = validate_manifest(parse_manifest(R"(
name: X
version: 1.0.0
task: raw
framework: {name: refnn, version: ^1.x}
inputs:
  - type: image
    element_type: uint8
    steps:
      crop: {method: center, percentage: 150}
)"));
  ASSERT_EQ(report.issues.size(), 1U);
  EXPECT_EQ(report.issues[0].field, "inputs[0].steps.crop.percentage");
}

TEST(ValidateManifestTest, FixturesAreClean) {
  for (const char* f : {"manifests/inception_v3.yml", "manifests/inception_v3_steps.yml",
                        "manifests/ssd_mobilenet_v1_coco.yml",
                        "manifests/mask_rcnn_resnet50_v2_atrous_coco.yml"}) {
    auto report = validate_manifest(parse_manifest(read_fixture(f)));
    EXPECT_TRUE(report.empty()) << f << "\n" << report.to_text();
  }
}

TEST(ValidateManifestTest, ReportsEveryViolation) {
  auto report = validate_manifest(parse_manifest(R"(
task: object_detection
framework: {version: ^1.x}
container:
  amd64: not-an-image
outputs:
  - type: box
)"));
  std::vector<std::string> fields;
  for (const auto& i : report.issues) fields.push_back(i.field);
  for (const char* expected : {"name", "version", "framework.name", "container.amd64",
                               "outputs[0].element_type", "outputs"}) {
    EXPECT_NE(std::find(fields.begin(), fields.end(), expected), fields.end())
        << expected;
  }
}

TEST(ValidateDocumentTest, WarningsForUnknownKeysAndScripts) {
  auto report = validate_document(read_fixture("manifests/inception_v3.yml"));
  EXPECT_FALSE(report.has_errors());
  EXPECT_FALSE(report.empty());
  auto parse_fail = validate_document("name: [");
  ASSERT_EQ(parse_fail.issues.size(), 1U);
  EXPECT_EQ(parse_fail.issues[0].severity, Severity::kError);
}

TEST(SelectContainerTest, FixtureContainerBlock) {
  Manifest m = parse_manifest(read_fixture("manifests/inception_v3.yml"));
  EXPECT_EQ(select_container(m.containers, Architecture::kAmd64, Accelerator::kGpu),
            "mlms/tensorflow:1-13-0_amd64-gpu");
  EXPECT_EQ(select_container(m.containers, Architecture::kArm64, Accelerator::kGpu),
            "mlms/tensorflow:1-13-0_arm64-cpu");
  m.containers.erase(Architecture::kPpc64le);
  try {
    select_container(m.containers, Architecture::kPpc64le, Accelerator::kCpu);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoContainerForArch);
  }
}

TEST(SelectContainerTest, NeverFabricatesImages) {
  Manifest m = parse_manifest(read_fixture("manifests/inception_v3.yml"));
  std::set<std::string> declared;
  for (const auto& [arch, e] : m.containers) {
    for (const auto& img : {e.single, e.cpu, e.gpu}) {
      if (img) declared.insert(*img);
    }
  }
  for (auto arch : {Architecture::kAmd64, Architecture::kArm64, Architecture::kPpc64le}) {
    for (auto acc : {Accelerator::kCpu, Accelerator::kGpu}) {
      EXPECT_TRUE(declared.contains(select_container(m.containers, arch, acc)));
    }
  }
}

TEST(ManifestKeyTest, CanonicalDeterministicInjective) {
  Manifest m = parse_manifest(read_fixture("manifests/inception_v3.yml"));
  EXPECT_EQ(manifest_key(m), "tensorflow/inception-v3/1.0.0");
  EXPECT_EQ(manifest_key(parse_manifest(read_fixture("manifests/inception_v3.yml"))),
            manifest_key(m));
  Manifest other = m;
  other.version = SemVer::parse("1.0.1");
  EXPECT_NE(manifest_key(other), manifest_key(m));
  Manifest spaced = m;
  spaced.name = "Inception v3";
  Manifest underscored = m;
  underscored.name = "Inception_v3";
  EXPECT_NE(manifest_key(spaced), manifest_key(underscored));
}

TEST(RenderManifestTest, RoundTripOnFixtures) {
  for (const char* f : {"manifests/inception_v3.yml", "manifests/inception_v3_steps.yml",
                        "manifests/ssd_mobilenet_v1_coco.yml",
                        "manifests/mask_rcnn_resnet50_v2_atrous_coco.yml"}) {
    Manifest m = parse_manifest(read_fixture(f));
    std::string text = render_manifest(m);
    EXPECT_EQ(parse_manifest(text), m) << f << "\n" << text;
  }
}

// Randomly mutated manifests must survive render/parse unchanged.
TEST(RenderManifestTest, RoundTripProperty) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> unit(0.0F, 255.0F);
  std::uniform_int_distribution<int> small(1, 500);
  Manifest base = parse_manifest(read_fixture("manifests/inception_v3_steps.yml"));
  for (int i = 0; i < 100; ++i) {
    Manifest m = base;
    m.name = "model-" + std::to_string(small(rng));
    m.version = SemVer{static_cast<std::uint64_t>(small(rng)), 0,
                       static_cast<std::uint64_t>(small(rng)), i % 3 ? "" : "rc1"};
    auto& steps = m.inputs[0].steps;
    std::get<steps::Crop>(steps[1]).percentage = small(rng) / 5.0;
    std::get<steps::Mean>(steps[3]).values = {unit(rng), unit(rng), unit(rng)};
    std::get<steps::Rescale>(steps[4]).value = unit(rng) + 1.0F;
    m.inputs[0].layer_name = LayerName{std::to_string(small(rng))};
    m.attributes["note.n" + std::to_string(i)] = "value: " + std::to_string(i);
    m.envvars.emplace_back("VAR" + std::to_string(i), "");
    EXPECT_EQ(parse_manifest(render_manifest(m)), m);
  }
}

}  // namespace
}  // namespace evalmesh::manifest
