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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "cluster_fixture.hpp"
#include "evalmesh/cli/cli.hpp"
#include "evalmesh/manifest/document.hpp"
#include "evalmesh/registry/json.hpp"

namespace evalmesh::cli {
namespace {

using namespace std::chrono_literals;
using nlohmann::json;

struct Outcome {
  int code;
  std::string out;
  std::string err;
  json j() const { return json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) {
  return std::string(EVALMESH_FIXTURE_DIR) + "/manifests/" + name;
}

TEST(CliTest, ValidatesManifestsLocally) {
  auto r = run({"manifest", "validate", fixture("inception_v3.yml")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("valid"), std::string::npos);

  testing::TempDir dir;
  testing::write_text(dir.file("bad.yml"), "name: x\nversion: 1.0.0\n");
  r = run({"--json", "manifest", "validate", dir.file("bad.yml")});
  EXPECT_EQ(r.code, kExitUser);
  EXPECT_FALSE(r.j()["valid"].get<bool>());
  EXPECT_FALSE(r.j()["issues"].empty());

  r = run({"manifest", "validate", dir.file("absent.yml")});
  EXPECT_EQ(r.code, kExitUser);
  EXPECT_NE(r.err.find("NotFound"), std::string::npos);
}

TEST(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, kExitUser);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUser);
  EXPECT_EQ(run({"evaluate", "--dispatch", "some"}).code, kExitUser);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(CliTest, AddressResolutionOrder) {
  testing::TempDir dir;
  testing::write_text(dir.file("c.json"), R"({"orchestrator": "http://from-config:1"})");
  testing::write_text(dir.file("env.json"), R"({"orchestrator": "http://from-env-config:1"})");
  EXPECT_EQ(resolve_address({"http://flag:1", dir.file("c.json"), {{kAddressEnv, "http://env:1"}}}),
            "http://flag:1");
  EXPECT_EQ(resolve_address({std::nullopt, dir.file("c.json"), {{kAddressEnv, "http://env:1"}}}),
            "http://env:1");
  EXPECT_EQ(resolve_address({std::nullopt, dir.file("c.json"), {}}), "http://from-config:1");
  EXPECT_EQ(resolve_address({std::nullopt, std::nullopt, {{kConfigEnv, dir.file("env.json")}}}),
            "http://from-env-config:1");
  EXPECT_EQ(resolve_address({std::nullopt, std::nullopt, {{"HOME", dir.file("nohome")}}}),
            kDefaultAddress);
  testing::write_text(dir.file("wrong.json"), R"({"address": 3})");
  EXPECT_ANY_THROW(resolve_address({std::nullopt, dir.file("wrong.json"), {}}));
}

TEST(CliTest, UnreachableOrchestratorIsInternal) {
  std::uint16_t port;
  {
    wire::FrameServer probe([](const std::string&, const json&) { return json::object(); }, {});
    probe.start();
    port = probe.port();
  }
  const auto r = run({"--orchestrator", "http://127.0.0.1:" + std::to_string(port), "agents"});
  EXPECT_EQ(r.code, kExitInternal);
  EXPECT_NE(r.err.find("ConnectionError"), std::string::npos);
}

class CliClusterTest : public ::testing::Test {
 protected:
  CliClusterTest() {
    cluster.add_agent("cpu-a", Accelerator::kCpu);
    cluster.add_agent("gpu-a", Accelerator::kGpu);
    url = cluster.server->rest_url();
    red = cluster.dir.file("red.ppm");
    green = cluster.dir.file("green.ppm");
    write_file_bytes(red, testing::solid_ppm(240, 10, 20));
    write_file_bytes(green, testing::solid_ppm(10, 240, 20));
  }

  Outcome cli(std::vector<std::string> args) {
    args.insert(args.begin(), {"--orchestrator", url});
    return run(args);
  }

  std::string write_manifest(const std::string& name, ColorLayout color) {
    auto m = testing::local_manifest(cluster.dir, name, "channel_mean");
    std::get<manifest::steps::Decode>(m.inputs[0].steps[0]).color_layout = color;
    const auto path = cluster.dir.file(name + ".yml");
    testing::write_text(path, manifest::render_manifest(m));
    return path;
  }

  testing::Cluster cluster;
  std::string url, red, green;
};

TEST_F(CliClusterTest, PublishListAndEvaluateByName) {
  const auto path = write_manifest("cm", ColorLayout::kRGB);
  auto r = cli({"--json", "manifest", "publish", path});
  ASSERT_EQ(r.code, kExitOk) << r.out << r.err;
  EXPECT_EQ(r.j()["key"], "refnn/cm/1.0.0");
  r = cli({"--json", "models"});
  ASSERT_EQ(r.j()["models"].size(), 1U);
  r = cli({"--json", "agents"});
  ASSERT_EQ(r.code, kExitOk);
  for (const auto& a : r.j()["agents"]) EXPECT_NO_THROW(registry::agent_from_json(a));

  r = cli({"--json", "evaluate", "--model", "cm", "--accelerator", "gpu", "--batch-sizes", "1,2",
           "--trace-level", "framework", "--input", red, "--input", green});
  ASSERT_EQ(r.code, kExitOk) << r.out << r.err;
  const auto view = orchestrator::view_from_json(r.j());
  EXPECT_EQ(view.completed, 2U);
  EXPECT_EQ(view.pending, 0U);
  for (const auto& res : view.results) {
    EXPECT_EQ(res.agent_id, "gpu-a");
    ASSERT_EQ(res.predictions.size(), 2U);
    EXPECT_EQ(res.predictions[0].input, "red.ppm");
    EXPECT_EQ(res.predictions[0].outputs[0][0].index, 0U);
    EXPECT_EQ(res.predictions[1].outputs[0][0].index, 1U);
  }
  EXPECT_EQ(orchestrator::to_json(view), r.j());

  r = cli({"--json", "results", "show", view.evaluation_id});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_EQ(orchestrator::view_from_json(r.j()).results, view.results);

  r = cli({"--json", "results", "list", "--agent", "gpu-a", "--batch-size", "2"});
  ASSERT_EQ(r.code, kExitOk);
  ASSERT_EQ(r.j()["results"].size(), 1U);
  EXPECT_EQ(wire::result_from_json(r.j()["results"][0]).batch_size, 2);
  r = cli({"results", "list", "--framework", "refnn", "--framework-version", "^2.x"});
  EXPECT_NE(r.out.find("0 result(s)"), std::string::npos);
  EXPECT_EQ(cli({"results", "list", "--status", "maybe"}).code, kExitUser);

  testing::write_text(cluster.dir.file("prices.json"), R"({"gpu-a": 3.6})");
  r = cli({"--json", "summarize", view.evaluation_id, "--prices", cluster.dir.file("prices.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const auto& s : r.j()["summaries"]) {
    const auto m = orchestrator::summary_from_json(s);
    EXPECT_TRUE(m.cost_per_million.has_value());
    EXPECT_EQ(orchestrator::to_json(m), s);
  }
  r = cli({"summarize", view.evaluation_id});
  EXPECT_NE(r.out.find("gpu-a"), std::string::npos);

  const auto trace_id = view.results[0].trace_id;
  r = cli({"--json", "trace", "show", trace_id});
  ASSERT_EQ(r.code, kExitOk);
  const auto tree = tracer::tree_from_json(r.j());
  EXPECT_EQ(tree.roots[0].span.name, "evaluation");
  EXPECT_EQ(tracer::tree_to_json(tree), r.j());
  r = cli({"trace", "show", trace_id});
  EXPECT_NE(r.out.find("evaluation [MODEL]"), std::string::npos);
  EXPECT_NE(r.out.find("  predict [FRAMEWORK]"), std::string::npos);
  EXPECT_EQ(cli({"trace", "show", "missing"}).code, kExitUser);
  EXPECT_EQ(cli({"results", "show", "ev-missing"}).code, kExitUser);
}

TEST_F(CliClusterTest, ImpossibleConstraintExitsOne) {
  const auto path = write_manifest("cm", ColorLayout::kRGB);
  auto r = cli({"evaluate", "--manifest", path, "--arch", "ppc64le", "--input", red});
  EXPECT_EQ(r.code, kExitUser);
  EXPECT_NE(r.err.find("NoAgentSatisfiesConstraints"), std::string::npos);
  r = cli({"--json", "evaluate", "--manifest", path, "--framework-constraint", "^3.x", "--input",
           red});
  EXPECT_EQ(r.code, kExitUser);
  EXPECT_EQ(r.j()["error"]["code"], "NoAgentSatisfiesConstraints");
  r = cli({"evaluate", "--manifest", path});
  EXPECT_EQ(r.code, kExitUser);
  EXPECT_NE(r.err.find("inputs"), std::string::npos);
  r = cli({"evaluate", "--manifest", path, "--input", red, "--batch-sizes", "4,2"});
  EXPECT_EQ(r.code, kExitUser);
  EXPECT_EQ(cli({"evaluate", "--manifest", path, "--input", red, "--arch", "sparc"}).code,
            kExitUser);
}

TEST_F(CliClusterTest, CompareListsFlippedTopOne) {
  const auto rgb = write_manifest("rgb", ColorLayout::kRGB);
  const auto bgr = write_manifest("bgr", ColorLayout::kBGR);
  auto a = cli({"--json", "evaluate", "--manifest", rgb, "--input", red, "--input", green});
  auto b = cli({"--json", "evaluate", "--manifest", bgr, "--input", red, "--input", green});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  ASSERT_EQ(b.code, kExitOk) << b.err;
  const auto ida = a.j()["evaluation_id"].get<std::string>();
  const auto idb = b.j()["evaluation_id"].get<std::string>();

  auto r = cli({"compare", ida, idb});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("* red.ppm"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("  green.ppm"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("agreement 1/2 (50.0%), 1 flipped"), std::string::npos) << r.out;

  r = cli({"--json", "compare", ida, idb});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.j()["flipped"], 1);
  EXPECT_EQ(r.j()["rows"][0]["a"]["index"], 0);
  EXPECT_EQ(r.j()["rows"][0]["b"]["index"], 2);
  EXPECT_EQ(cli({"compare", ida, "ev-missing"}).code, kExitUser);
}

TEST(CliServeTest, OrchestratorAndAgentServeUntilStopped) {
  testing::TempDir dir;
  const auto ready = dir.file("orch.json");
  std::ostringstream oout, oerr;
  int ocode = -1;
  std::thread orch([&] {
    ocode = dispatch({"orchestrator", "serve", "--wire-port", "0", "--rest-port", "0",
                      "--history", dir.file("h.jsonl"), "--ready-file", ready},
                     oout, oerr);
  });
  for (int i = 0; i < 200 && !std::filesystem::exists(ready); ++i) std::this_thread::sleep_for(10ms);
  ASSERT_TRUE(std::filesystem::exists(ready));
  std::ifstream in(ready);
  const auto addrs = json::parse(in);

  const auto aready = dir.file("agent.json");
  std::ostringstream aout, aerr;
  int acode = -1;
  std::thread agent([&] {
    acode = dispatch({"agent", "serve", "--id", "cli-agent", "--registry",
                      addrs["wire"].get<std::string>(), "--label", "zone=a", "--cache-dir",
                      dir.file("cache"), "--framework-version", "1.12.0", "--ready-file", aready},
                     aout, aerr);
  });
  for (int i = 0; i < 200 && !std::filesystem::exists(aready); ++i) std::this_thread::sleep_for(10ms);
  ASSERT_TRUE(std::filesystem::exists(aready));
  const auto r = run({"--orchestrator", addrs["rest"].get<std::string>(), "--json", "agents"});
  ASSERT_EQ(r.code, kExitOk);
  ASSERT_EQ(r.j()["agents"].size(), 1U);
  const auto rec = registry::agent_from_json(r.j()["agents"][0]);
  EXPECT_EQ(rec.agent_id, "cli-agent");
  EXPECT_EQ(rec.hardware.labels.at("zone"), "a");
  ASSERT_EQ(rec.frameworks.size(), 1U);
  EXPECT_EQ(rec.frameworks[0].version.to_string(), "1.12.0");

  request_stop();
  agent.join();
  orch.join();
  EXPECT_EQ(acode, kExitOk) << aerr.str();
  EXPECT_EQ(ocode, kExitOk) << oerr.str();
}

}  // namespace
}  // namespace evalmesh::cli
