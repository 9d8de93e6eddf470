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
#include <httplib.h>

#include <algorithm>
#include <random>
#include <set>

#include "cluster_fixture.hpp"
#include "evalmesh/manifest/document.hpp"
#include "evalmesh/manifest/selection.hpp"
#include "evalmesh/registry/json.hpp"

namespace evalmesh::orchestrator {
namespace {

using namespace std::chrono_literals;
using nlohmann::json;
using testing::blob;
using testing::Cluster;
using testing::ver;

EvaluationRequest request_for(const manifest::Manifest& m,
                              std::vector<wire::InputBlob> inputs) {
  EvaluationRequest req;
  req.manifest = m;
  req.inputs = std::move(inputs);
  return req;
}

wire::EvaluationResult fake_result(std::string agent, std::int64_t batch,
                                   std::vector<std::int64_t> latencies) {
  wire::EvaluationResult r;
  r.evaluation_id = "ev";
  r.agent_id = std::move(agent);
  r.batch_size = batch;
  r.latencies_us = std::move(latencies);
  return r;
}

// ---- request codec ----

TEST(RequestTest, JsonRoundTrip) {
  testing::TempDir dir;
  EvaluationRequest req;
  req.model_name = "cm";
  req.model_version = manifest::VersionConstraint::parse("^1.x");
  req.framework = manifest::FrameworkSpec{"refnn", manifest::VersionConstraint::parse("^1.x")};
  req.hardware.accelerator = Accelerator::kGpu;
  req.hardware.labels["zone"] = "a";
  req.inputs = {blob({1, 2, 3}, "x.ppm")};
  req.files = {"/data/y.ppm"};
  req.batch_sizes = {1, 4, 16};
  req.trace_level = tracer::TraceLevel::kLayer;
  req.dispatch = Dispatch::kAll;
  req.top_k = 3;
  const auto back = request_from_json(json::parse(to_json(req).dump()));
  EXPECT_EQ(back.model_name, "cm");
  EXPECT_EQ(back.model_version, req.model_version);
  EXPECT_EQ(back.framework, req.framework);
  EXPECT_EQ(back.hardware, req.hardware);
  EXPECT_EQ(back.inputs, req.inputs);
  EXPECT_EQ(back.files, req.files);
  EXPECT_EQ(back.batch_sizes, req.batch_sizes);
  EXPECT_EQ(back.trace_level, req.trace_level);
  EXPECT_EQ(back.dispatch, Dispatch::kAll);
  EXPECT_EQ(back.top_k, 3U);

  req.manifest = testing::reference_manifest("cm", "channel_mean");
  EXPECT_EQ(request_from_json(to_json(req)).manifest, req.manifest);
}

TEST(RequestTest, RejectsBadRequestsWithField) {
  auto field_of = [](const json& j) {
    try {
      request_from_json(j);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
      return e.field();
    }
    return std::string("<accepted>");
  };
  const json base = {{"model", "cm"}, {"files", {"a.ppm"}}};
  EXPECT_EQ(field_of(base), "<accepted>");
  auto j = base;
  j["batch_sizes"] = {4, 2};
  EXPECT_EQ(field_of(j), "batch_sizes[1]");
  j["batch_sizes"] = {0};
  EXPECT_EQ(field_of(j), "batch_sizes[0]");
  j = base;
  j.erase("files");
  EXPECT_EQ(field_of(j), "inputs");
  j = base;
  j["dispatch"] = "some";
  EXPECT_EQ(field_of(j), "dispatch");
  j = base;
  j["trace_level"] = "deep";
  EXPECT_EQ(field_of(j), "trace_level");
  j = base;
  j.erase("model");
  EXPECT_EQ(field_of(j), "model");
  EXPECT_THROW(request_from_json(json::array()), Error);
  EXPECT_THROW(request_from_json({{"model", "cm"}, {"files", 3}}), Error);
}

// ---- metrics ----

TEST(MetricsTest, PercentilesInterpolate) {
  EXPECT_DOUBLE_EQ(percentile({5, 1, 4, 2, 3}, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 0.99), 4.96);
  EXPECT_DOUBLE_EQ(percentile({7}, 0.99), 7.0);
  EXPECT_DOUBLE_EQ(percentile({1, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(percentile({1, 2}, 1.0), 2.0);
  const auto s = latency_stats({10, 20, 30, 40});
  EXPECT_DOUBLE_EQ(s.min_us, 10);
  EXPECT_DOUBLE_EQ(s.max_us, 40);
  EXPECT_DOUBLE_EQ(s.mean_us, 25);
  EXPECT_DOUBLE_EQ(s.p50_us, 25);
}

TEST(MetricsTest, ThroughputAndCostExamples) {
  EXPECT_DOUBLE_EQ(throughput(1, 10'000), 100.0);
  EXPECT_DOUBLE_EQ(throughput(8, 20'000), 400.0);
  EXPECT_EQ(cost_per_million(3.60, 1000.0), 1.00);
}

TEST(MetricsTest, SummarizeGroupsByAgentAndBatch) {
  auto a1 = fake_result("b-agent", 1, {10'000, 10'000});
  auto a8 = fake_result("b-agent", 8, {20'000});
  auto other = fake_result("a-agent", 1, {5'000});
  other.hardware.labels["instance"] = "p3.2xlarge";
  auto failed = fake_result("a-agent", 1, {1});
  failed.status = wire::EvaluationStatus::kFailed;
  const PriceTable prices = {{"b-agent", 3.6}, {"p3.2xlarge", 3.06}};
  const auto s = summarize({a8, failed, a1, other}, prices);
  ASSERT_EQ(s.size(), 3U);
  EXPECT_EQ(s[0].agent_id, "a-agent");
  EXPECT_EQ(s[0].batches, 1U);
  EXPECT_DOUBLE_EQ(s[0].throughput, 200.0);
  ASSERT_TRUE(s[0].cost_per_million);
  EXPECT_DOUBLE_EQ(*s[0].cost_per_million, 3.06 * 1e6 / (3600 * 200.0));
  EXPECT_EQ(s[1].batch_size, 1);
  EXPECT_EQ(s[1].batches, 2U);
  EXPECT_DOUBLE_EQ(s[1].throughput, 100.0);
  EXPECT_EQ(s[2].batch_size, 8);
  EXPECT_DOUBLE_EQ(s[2].throughput, 400.0);
  EXPECT_DOUBLE_EQ(*s[2].cost_per_million, 3.6 * 1e6 / (3600 * 400.0));
  EXPECT_FALSE(summarize({a1}).front().cost_per_million);

  try {
    summarize({failed});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoSuccessfulResults);
  }
  EXPECT_THROW(summarize({}), Error);
}

TEST(MetricsTest, ScaleConsistencyProperty) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<std::int64_t> lat(1, 5'000'000);
  std::uniform_int_distribution<int> count(1, 20);
  std::uniform_int_distribution<std::int64_t> batch(1, 64);
  std::uniform_real_distribution<double> price(0.01, 40.0);
  for (int trial = 0; trial < 500; ++trial) {
    auto r = fake_result("x", batch(rng), {});
    for (int i = count(rng); i > 0; --i) r.latencies_us.push_back(lat(rng));
    auto doubled = r;
    for (auto& v : doubled.latencies_us) v *= 2;
    const PriceTable prices = {{"x", price(rng)}};
    const auto a = summarize({r}, prices).front();
    const auto b = summarize({doubled}, prices).front();
    EXPECT_EQ(b.throughput, a.throughput / 2);
    EXPECT_EQ(*b.cost_per_million, *a.cost_per_million * 2);
    EXPECT_GT(a.throughput, 0);
  }
}

TEST(MetricsTest, SummaryJsonRoundTrip) {
  const auto s = summarize({fake_result("x", 2, {3, 5, 9})}, {{"x", 1.5}}).front();
  EXPECT_EQ(summary_from_json(json::parse(to_json(s).dump())), s);
  EXPECT_THROW(parse_price_table(json{{"x", "cheap"}}), Error);
  EXPECT_THROW(parse_price_table(json{{"x", -1}}), Error);
  EXPECT_EQ(parse_price_table(json{{"x", 2}}).at("x"), 2.0);
}

// ---- history store ----

struct Universe {
  std::vector<std::string> models{"resnet50", "ResNet101", "vgg16"};
  std::vector<std::string> model_versions{"1.0.0", "1.2.0", "2.0.0"};
  std::vector<manifest::SemVer> fw{ver(1, 10), ver(1, 13), ver(2, 0)};
  std::vector<std::string> agents{"a", "b", "c"};
};

wire::EvaluationResult random_result(std::mt19937& rng, const Universe& u, int i) {
  auto pick = [&](const auto& v) { return v[rng() % v.size()]; };
  wire::EvaluationResult r;
  r.evaluation_id = "ev" + std::to_string(rng() % 5);
  r.agent_id = pick(u.agents);
  r.model_name = pick(u.models);
  r.model_version = pick(u.model_versions);
  r.framework = {rng() % 4 == 0 ? "other" : "refnn", pick(u.fw)};
  r.hardware.arch = rng() % 2 ? Architecture::kAmd64 : Architecture::kArm64;
  r.hardware.accelerator = rng() % 2 ? Accelerator::kGpu : Accelerator::kCpu;
  r.batch_size = 1 << (rng() % 3);
  r.status = rng() % 5 == 0 ? wire::EvaluationStatus::kFailed : wire::EvaluationStatus::kOk;
  r.completed_at_ms = static_cast<std::int64_t>(rng() % 50);
  r.latencies_us = {i};
  return r;
}

// Straight-line restatement of the filter semantics.
bool oracle(const wire::EvaluationResult& r, const HistoryFilter& f) {
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  if (f.model) {
    const auto p = lower(*f.model);
    const auto n = lower(r.model_name);
    if (p.back() == '*') {
      if (n.rfind(p.substr(0, p.size() - 1), 0) != 0) return false;
    } else if (p != n) {
      return false;
    }
  }
  if (f.model_version && r.model_version[0] != '1') return false;  // only ^1.x is drawn
  if (f.framework) {
    if (r.framework.name != "refnn") return false;
    if (f.framework->constraint && r.framework.version.major != 1) return false;
  }
  if (f.hardware.arch && r.hardware.arch != *f.hardware.arch) return false;
  if (f.hardware.accelerator && r.hardware.accelerator != *f.hardware.accelerator) return false;
  if (f.agent_id && r.agent_id != *f.agent_id) return false;
  if (f.status && r.status != *f.status) return false;
  if (f.batch_size && r.batch_size != *f.batch_size) return false;
  return true;
}

TEST(HistoryTest, FilterMatchesOracleProperty) {
  std::mt19937 rng(99);
  Universe u;
  InMemoryResultStore store;
  std::vector<wire::EvaluationResult> all;
  for (int i = 0; i < 400; ++i) {
    all.push_back(random_result(rng, u, i));
    store.append(all.back());
  }
  for (int trial = 0; trial < 1000; ++trial) {
    HistoryFilter f;
    if (rng() % 2) f.model = std::vector<std::string>{"resnet*", "VGG16", "RESNET50"}[rng() % 3];
    if (rng() % 3 == 0) f.model_version = manifest::VersionConstraint::parse("^1.x");
    if (rng() % 2) {
      f.framework = manifest::FrameworkSpec{"REFNN", std::nullopt};
      if (rng() % 2) f.framework->constraint = manifest::VersionConstraint::parse("^1.x");
    }
    if (rng() % 3 == 0) f.hardware.arch = Architecture::kArm64;
    if (rng() % 3 == 0) f.hardware.accelerator = Accelerator::kGpu;
    if (rng() % 3 == 0) f.agent_id = u.agents[rng() % 3];
    if (rng() % 4 == 0) f.status = wire::EvaluationStatus::kOk;
    if (rng() % 4 == 0) f.batch_size = 2;

    std::vector<wire::EvaluationResult> expected;
    for (const auto& r : all) {
      if (oracle(r, f)) expected.push_back(r);
    }
    std::stable_sort(expected.begin(), expected.end(), history_less);
    const auto got = store.query(f);
    ASSERT_EQ(got.size(), expected.size()) << "trial " << trial;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_FALSE(history_less(got[i], expected[i]) || history_less(expected[i], got[i]));
    }
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end(), history_less));
  }
}

TEST(HistoryTest, FrameworkCaretExcludesMajorTwo) {
  InMemoryResultStore store;
  for (auto v : {ver(1, 10), ver(1, 13), ver(2, 0)}) {
    auto r = fake_result("a", 1, {1});
    r.framework = {"refnn", v};
    store.append(r);
  }
  HistoryFilter f;
  f.framework = manifest::FrameworkSpec{"refnn", manifest::VersionConstraint::parse("^1.x")};
  const auto got = store.query(f);
  ASSERT_EQ(got.size(), 2U);
  for (const auto& r : got) EXPECT_EQ(r.framework.version.major, 1U);
}

TEST(HistoryTest, AppendOnlyKeepsEarlierAnswers) {
  std::mt19937 rng(3);
  Universe u;
  InMemoryResultStore store;
  std::vector<std::vector<wire::EvaluationResult>> snapshots;
  for (int i = 0; i < 200; ++i) {
    store.append(random_result(rng, u, i));
    const auto now = store.query({});
    if (!snapshots.empty()) {
      for (const auto& old : snapshots.back()) {
        EXPECT_NE(std::find(now.begin(), now.end(), old), now.end());
      }
    }
    snapshots.push_back(now);
  }
}

TEST(HistoryTest, JsonlPersistsAcrossReopen) {
  testing::TempDir dir;
  const auto path = dir.file("history.jsonl");
  std::mt19937 rng(8);
  Universe u;
  std::vector<wire::EvaluationResult> written;
  {
    JsonlResultStore store(path);
    for (int i = 0; i < 30; ++i) {
      written.push_back(random_result(rng, u, i));
      written.back().predictions = {
          wire::ItemPredictions{"in" + std::to_string(i), {{pipeline::Prediction{3, "cat", 0.5F}}}}};
      store.append(written.back());
    }
  }
  JsonlResultStore reopened(path);
  std::stable_sort(written.begin(), written.end(), history_less);
  const auto got = reopened.query({});
  ASSERT_EQ(got.size(), written.size());
  for (const auto& r : written) EXPECT_NE(std::find(got.begin(), got.end(), r), got.end());
  reopened.append(written.front());
  EXPECT_EQ(JsonlResultStore(path).query({}).size(), 31U);

  testing::write_text(dir.file("bad.jsonl"), "{\"evaluation_id\":\n");
  EXPECT_THROW(JsonlResultStore(dir.file("bad.jsonl")), Error);
}

TEST(TraceStoreTest, MergesBySpanId) {
  TraceStore store;
  tracer::Span root{1, 0, "t", tracer::TraceLevel::kModel, "evaluation", 0, 100, {}};
  tracer::Span child{2, 1, "t", tracer::TraceLevel::kFramework, "predict", 10, 90, {}};
  store.add({root});
  store.add({child, root});
  const auto tree = store.get("t");
  EXPECT_EQ(tree.span_count(), 2U);
  EXPECT_EQ(tree.depth(), 2U);
  EXPECT_TRUE(store.contains("t"));
  try {
    store.get("missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

// ---- end to end ----

manifest::Manifest cm_manifest(const testing::TempDir& dir, const std::string& name = "cm",
                               const std::string& constraint = "^1.x") {
  return testing::local_manifest(dir, name, "channel_mean", "{}", constraint);
}

TEST(OrchestratorTest, GpuConstraintDispatchesOnlyToGpuAgents) {
  Cluster c;
  c.add_agent("cpu-a", Accelerator::kCpu);
  c.add_agent("gpu-a", Accelerator::kGpu);
  c.add_agent("gpu-v2", Accelerator::kGpu, {ver(2, 0)});
  auto req = request_for(cm_manifest(c.dir), {blob(testing::solid_ppm(250, 3, 3), "red")});
  req.hardware.accelerator = Accelerator::kGpu;
  req.dispatch = Dispatch::kAll;
  const auto id = c.orch().submit(req);
  const auto view = c.orch().wait(id, 10s);
  ASSERT_EQ(view.jobs.size(), 1U);
  EXPECT_EQ(view.jobs[0].agent_id, "gpu-a");
  ASSERT_EQ(view.completed, 1U);
  EXPECT_EQ(view.pending, 0U);
  const auto& r = view.results[0];
  EXPECT_EQ(r.agent_id, "gpu-a");
  EXPECT_EQ(r.hardware.accelerator, Accelerator::kGpu);
  EXPECT_EQ(r.predictions[0].outputs[0][0].index, 0U);
  EXPECT_EQ(r.framework.version.major, 1U);

  HistoryFilter f;
  f.evaluation_id = id;
  EXPECT_EQ(c.orch().query_history(f).size(), 1U);
}

TEST(OrchestratorTest, FanOutConservation) {
  Cluster c;
  c.add_agent("a", Accelerator::kCpu);
  c.add_agent("b", Accelerator::kGpu);
  c.add_agent("v2", Accelerator::kCpu, {ver(2, 1)});
  std::vector<wire::InputBlob> inputs;
  for (int i = 0; i < 5; ++i) {
    inputs.push_back(blob(testing::solid_ppm(10 * i, 200, 0), "img" + std::to_string(i)));
  }
  auto req = request_for(cm_manifest(c.dir), inputs);
  req.batch_sizes = {1, 2, 4};
  req.dispatch = Dispatch::kAll;
  const auto id = c.orch().submit(req);
  const auto view = c.orch().wait(id, 15s);
  EXPECT_EQ(view.jobs.size(), 6U);
  EXPECT_EQ(view.completed + view.failed, view.jobs.size());
  EXPECT_EQ(view.completed, 6U);
  std::set<std::pair<std::string, std::int64_t>> seen;
  for (const auto& r : view.results) {
    EXPECT_TRUE(seen.emplace(r.agent_id, r.batch_size).second);
    EXPECT_EQ(r.predictions.size(), 5U);
    EXPECT_EQ(r.latencies_us.size(), static_cast<std::size_t>((5 + r.batch_size - 1) / r.batch_size));
    EXPECT_NE(r.agent_id, "v2");
  }
  EXPECT_EQ(seen.size(), 6U);
  EXPECT_EQ(c.orch().summarize_evaluation(id, {}).size(), 6U);
}

TEST(OrchestratorTest, DispatchOnePicksASingleAgent) {
  Cluster c;
  c.add_agent("a", Accelerator::kCpu);
  c.add_agent("b", Accelerator::kCpu);
  const auto id = c.orch().submit(
      request_for(cm_manifest(c.dir), {blob(testing::solid_ppm(1, 2, 3), "x")}));
  const auto view = c.orch().wait(id, 10s);
  ASSERT_EQ(view.jobs.size(), 1U);
  EXPECT_EQ(view.completed, 1U);
}

TEST(OrchestratorTest, NoAgentIsReportedSynchronously) {
  Cluster c;
  c.add_agent("a", Accelerator::kCpu);
  auto req = request_for(cm_manifest(c.dir, "cm", "^3.x"), {blob({1}, "x")});
  try {
    c.orch().submit(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoAgentSatisfiesConstraints);
  }
  req = request_for(cm_manifest(c.dir), {blob({1}, "x")});
  req.hardware.arch = Architecture::kPpc64le;
  EXPECT_THROW(c.orch().submit(req), Error);
  EXPECT_TRUE(c.orch().query_history({}).empty());
}

TEST(OrchestratorTest, FrameworkOverridePicksMajorVersion) {
  Cluster c;
  c.add_agent("v1", Accelerator::kCpu);
  c.add_agent("v2", Accelerator::kCpu, {ver(2, 0)});
  auto req = request_for(cm_manifest(c.dir), {blob(testing::solid_ppm(1, 2, 3), "x")});
  req.dispatch = Dispatch::kAll;
  req.framework = manifest::FrameworkSpec{"refnn", manifest::VersionConstraint::parse("^2.x")};
  const auto view = c.orch().wait(c.orch().submit(req), 10s);
  ASSERT_EQ(view.results.size(), 1U);
  EXPECT_EQ(view.results[0].agent_id, "v2");
  EXPECT_EQ(view.results[0].framework.version, ver(2, 0));
}

TEST(OrchestratorTest, ResolvesStoredManifests) {
  Cluster c;
  c.add_agent("a", Accelerator::kCpu);
  auto v1 = cm_manifest(c.dir, "stored");
  auto v2 = v1;
  v2.version = manifest::SemVer{1, 5, 0, {}};
  c.registry->put_manifest(v1);
  c.registry->put_manifest(v2);
  EvaluationRequest req;
  req.model_name = "STORED";
  req.inputs = {blob(testing::solid_ppm(1, 2, 3), "x")};
  EXPECT_EQ(c.orch().resolve_manifest(req).version, v2.version);
  req.model_version = manifest::VersionConstraint::parse("1.0.0");
  EXPECT_EQ(c.orch().resolve_manifest(req).version, v1.version);
  req.model_version.reset();
  req.manifest_key = manifest::manifest_key(v1);
  EXPECT_EQ(c.orch().resolve_manifest(req), v1);
  const auto view = c.orch().wait(c.orch().submit(req), 10s);
  ASSERT_EQ(view.completed, 1U);
  EXPECT_EQ(view.results[0].model_version, "1.0.0");

  req.manifest_key = "nope:1.0.0";
  EXPECT_THROW(c.orch().resolve_manifest(req), Error);
  req.manifest_key.reset();
  req.model_name = "absent";
  try {
    c.orch().submit(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST(OrchestratorTest, AgentFailuresAreCountedAsFailed) {
  Cluster c;
  c.add_agent("a", Accelerator::kCpu);
  c.add_agent("b", Accelerator::kCpu);
  auto m = cm_manifest(c.dir);
  m.source.graph_path = c.dir.file("missing-graph.json");
  auto req = request_for(m, {blob(testing::solid_ppm(1, 2, 3), "x")});
  req.dispatch = Dispatch::kAll;
  const auto id = c.orch().submit(req);
  const auto view = c.orch().wait(id, 10s);
  EXPECT_EQ(view.failed, 2U);
  EXPECT_EQ(view.completed, 0U);
  for (const auto& r : view.results) {
    ASSERT_TRUE(r.error);
    EXPECT_EQ(r.error->code, "FetchError");
  }
  try {
    c.orch().summarize_evaluation(id, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoSuccessfulResults);
  }
}

registry::AgentRecord fake_agent(const std::string& id, const std::string& address) {
  registry::AgentRecord rec;
  rec.agent_id = id;
  rec.address = address;
  rec.frameworks = {{"refnn", ver(1, 13)}};
  rec.ttl_ms = 600'000;
  return rec;
}

TEST(OrchestratorTest, UnreachableAgentBecomesFailedResult) {
  Cluster c;
  std::uint16_t port;
  {
    wire::FrameServer probe([](const std::string&, const json&) { return json::object(); }, {});
    probe.start();
    port = probe.port();
  }
  c.registry->register_agent(fake_agent("ghost", "127.0.0.1:" + std::to_string(port)));
  const auto id = c.orch().submit(request_for(cm_manifest(c.dir), {blob({1}, "x")}));
  const auto view = c.orch().wait(id, 10s);
  ASSERT_EQ(view.failed, 1U);
  EXPECT_EQ(view.results[0].error->code, "ConnectionError");
  EXPECT_EQ(view.pending, 0U);
}

TEST(OrchestratorTest, SilentAgentTimesOut) {
  OrchestratorServer::Options o;
  o.orchestrator.job_timeout = 300ms;
  o.orchestrator.expire_interval = 50ms;
  Cluster c(o);
  wire::FrameServer silent(
      [](const std::string&, const json&) { return json{{"accepted", true}}; }, {});
  silent.start();
  c.registry->register_agent(fake_agent("silent", silent.endpoint().to_string()));
  const auto id = c.orch().submit(request_for(cm_manifest(c.dir), {blob({1}, "x")}));
  EXPECT_EQ(c.orch().get(id).pending, 1U);
  const auto view = c.orch().wait(id, 5s);
  ASSERT_EQ(view.failed, 1U);
  EXPECT_EQ(view.pending, 0U);

  // A late result for the settled job is ignored.
  auto late = view.results[0];
  late.status = wire::EvaluationStatus::kOk;
  late.error.reset();
  c.orch().collect(late);
  EXPECT_EQ(c.orch().get(id).failed, 1U);
  EXPECT_EQ(c.orch().query_history({}).size(), 1U);
}

TEST(OrchestratorTest, CollectRejectsUnknownEvaluationsAndJobs) {
  Cluster c;
  auto r = fake_result("a", 1, {1});
  r.evaluation_id = "ev-missing";
  try {
    c.orch().collect(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownEvaluation);
  }
  EXPECT_THROW(c.orch().get("ev-missing"), Error);

  wire::FrameServer silent(
      [](const std::string&, const json&) { return json{{"accepted", true}}; }, {});
  silent.start();
  c.registry->register_agent(fake_agent("silent", silent.endpoint().to_string()));
  const auto id = c.orch().submit(request_for(cm_manifest(c.dir), {blob({1}, "x")}));
  r.evaluation_id = id;
  r.agent_id = "other";
  EXPECT_THROW(c.orch().collect(r), Error);
  r.agent_id = "silent";
  c.orch().collect(r);
  c.orch().collect(r);
  const auto view = c.orch().get(id);
  EXPECT_EQ(view.completed, 1U);
  EXPECT_EQ(view.results.size(), 1U);
}

TEST(OrchestratorTest, TracesAreStoredPerResult) {
  Cluster c;
  c.add_agent("a", Accelerator::kCpu);
  auto m = testing::local_manifest(c.dir, "prof", "synthetic_profile",
                                   testing::profile_graph({{"conv1", 800}, {"relu1", 200}}));
  auto req = request_for(m, {blob(testing::solid_ppm(1, 2, 3), "x")});
  req.trace_level = tracer::TraceLevel::kLayer;
  const auto view = c.orch().wait(c.orch().submit(req), 10s);
  ASSERT_EQ(view.completed, 1U);
  const auto& r = view.results[0];
  const auto tree = c.orch().trace(r.trace_id);
  ASSERT_EQ(tree.roots.size(), 1U);
  EXPECT_EQ(tree.roots[0].span.name, "evaluation");
  EXPECT_TRUE(tracer::check_invariants(tree).empty());
  const auto layers = tracer::aggregate_layers({tree}, tracer::TraceLevel::kLayer);
  std::set<std::string> names;
  for (const auto& l : layers) names.insert(l.name);
  EXPECT_TRUE(names.count("conv1") && names.count("relu1"));
  EXPECT_THROW(c.orch().trace("absent"), Error);
}

TEST(OrchestratorTest, CompareFlagsColorLayoutFlips) {
  Cluster c;
  c.add_agent("a", Accelerator::kCpu);
  auto rgb = cm_manifest(c.dir, "rgb");
  auto bgr = cm_manifest(c.dir, "bgr");
  std::get<manifest::steps::Decode>(bgr.inputs[0].steps[0]).color_layout = ColorLayout::kBGR;
  std::vector<wire::InputBlob> inputs = {blob(testing::solid_ppm(240, 10, 20), "red"),
                                         blob(testing::solid_ppm(10, 240, 20), "green")};
  const auto a = c.orch().submit(request_for(rgb, inputs));
  const auto b = c.orch().submit(request_for(bgr, inputs));
  c.orch().wait(a, 10s);
  c.orch().wait(b, 10s);
  const auto cmp = c.orch().compare(a, b);
  ASSERT_EQ(cmp.rows.size(), 2U);
  EXPECT_TRUE(cmp.rows[0].flipped);
  EXPECT_EQ(cmp.rows[0].a->index, 0U);
  EXPECT_EQ(cmp.rows[0].b->index, 2U);
  EXPECT_FALSE(cmp.rows[1].flipped);
  EXPECT_EQ(cmp.flipped, 1U);
  EXPECT_DOUBLE_EQ(cmp.agreement, 0.5);
  EXPECT_TRUE(cmp.a_throughput && cmp.b_throughput);
  const auto self = c.orch().compare(a, a);
  EXPECT_EQ(self.flipped, 0U);
  EXPECT_DOUBLE_EQ(self.agreement, 1.0);
}

TEST(OrchestratorTest, FilesAndDatasetsExpandToUrls) {
  Cluster c;
  c.add_agent("a", Accelerator::kCpu);
  std::string listing = "# inputs\n";
  std::vector<std::string> files;
  for (int i = 0; i < 3; ++i) {
    const auto path = c.dir.file("in" + std::to_string(i) + ".ppm");
    const auto bytes = testing::solid_ppm(200, 0, 0);
    write_file_bytes(path, bytes);
    files.push_back(path);
    listing += path + "\n";
  }
  testing::write_text(c.dir.file("dataset.txt"), listing);
  auto req = request_for(cm_manifest(c.dir), {});
  req.files = {files[0]};
  req.dataset = c.dir.file("dataset.txt");
  const auto view = c.orch().wait(c.orch().submit(req), 10s);
  ASSERT_EQ(view.completed, 1U);
  ASSERT_EQ(view.results[0].predictions.size(), 4U);
  EXPECT_EQ(view.results[0].predictions[1].input, files[0]);
  req.dataset = c.dir.file("no-such-dataset.txt");
  EXPECT_THROW(c.orch().submit(req), Error);
}

TEST(OrchestratorTest, JsonlHistorySurvivesRestart) {
  testing::TempDir keep;
  const auto path = keep.file("h.jsonl");
  std::string id;
  {
    Cluster c({}, std::make_shared<JsonlResultStore>(path));
    c.add_agent("a", Accelerator::kCpu);
    id = c.orch().submit(request_for(cm_manifest(c.dir), {blob(testing::solid_ppm(1, 2, 3), "x")}));
    ASSERT_EQ(c.orch().wait(id, 10s).completed, 1U);
  }
  Cluster c({}, std::make_shared<JsonlResultStore>(path));
  HistoryFilter f;
  f.evaluation_id = id;
  EXPECT_EQ(c.orch().query_history(f).size(), 1U);
}

// ---- REST ----

class RestTest : public ::testing::Test {
 protected:
  RestTest() : cluster({}, nullptr), http("127.0.0.1", cluster.server->rest_port()) {
    http.set_read_timeout(10, 0);
  }

  json body(const httplib::Result& res) { return json::parse(res->body); }

  Cluster cluster;
  httplib::Client http;
};

TEST_F(RestTest, HealthAndUnknownPaths) {
  auto res = http.Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(body(res)["status"], "ok");
  res = http.Get("/nowhere");
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(body(res)["error"]["code"], "NotFound");
}

TEST_F(RestTest, PublishesAndListsManifests) {
  const auto m = cm_manifest(cluster.dir, "published");
  const auto yaml = manifest::render_manifest(m);
  auto res = http.Post("/manifests", yaml, "text/yaml");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  EXPECT_EQ(body(res)["key"], manifest::manifest_key(m));
  res = http.Post("/manifests", json{{"manifest", yaml}}.dump(), "application/json");
  EXPECT_EQ(res->status, 201);

  auto changed = m;
  changed.description = "different";
  res = http.Post("/manifests", manifest::render_manifest(changed), "text/yaml");
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(body(res)["error"]["code"], "DuplicateKey");

  res = http.Post("/manifests", "name: [unclosed", "text/yaml");
  EXPECT_EQ(res->status, 400);
  EXPECT_TRUE(body(res)["error"].contains("field"));

  res = http.Get("/models?name=PUB*");
  ASSERT_EQ(res->status, 200);
  ASSERT_EQ(body(res)["models"].size(), 1U);
  EXPECT_EQ(body(res)["models"][0]["name"], "published");
  EXPECT_EQ(manifest::parse_manifest(body(res)["models"][0]["manifest"].get<std::string>()), m);
  EXPECT_EQ(body(http.Get("/models?name=other"))["models"].size(), 0U);
  EXPECT_EQ(http.Get("/models?version=%5Ebad")->status, 400);
}

TEST_F(RestTest, EvaluationLifecycle) {
  cluster.add_agent("cpu-a", Accelerator::kCpu);
  cluster.add_agent("gpu-a", Accelerator::kGpu);
  auto res = http.Get("/agents");
  ASSERT_EQ(res->status, 200);
  ASSERT_EQ(body(res)["agents"].size(), 2U);
  EXPECT_EQ(registry::agent_from_json(body(res)["agents"][0]).agent_id, "cpu-a");

  EvaluationRequest req =
      request_for(cm_manifest(cluster.dir), {blob(testing::solid_ppm(250, 0, 0), "red")});
  req.dispatch = Dispatch::kAll;
  req.batch_sizes = {1, 2};
  req.trace_level = tracer::TraceLevel::kFramework;
  res = http.Post("/evaluations", to_json(req).dump(), "application/json");
  ASSERT_EQ(res->status, 202);
  const auto id = body(res)["evaluation_id"].get<std::string>();
  EXPECT_EQ(body(res)["jobs"].size(), 4U);

  res = http.Get("/evaluations/" + id + "?wait_ms=10000");
  ASSERT_EQ(res->status, 200);
  const auto view = view_from_json(body(res));
  EXPECT_EQ(view.completed, 4U);
  EXPECT_EQ(view.pending, 0U);
  EXPECT_EQ(view.results[0].predictions[0].outputs[0][0].index, 0U);

  res = http.Get("/evaluations?agent=gpu-a&batch_size=2");
  ASSERT_EQ(res->status, 200);
  ASSERT_EQ(body(res)["results"].size(), 1U);
  EXPECT_EQ(wire::result_from_json(body(res)["results"][0]).agent_id, "gpu-a");
  EXPECT_EQ(body(http.Get("/evaluations?accelerator=gpu&framework=refnn&framework_version=%5E1.x"))
                ["results"].size(),
            2U);
  EXPECT_EQ(body(http.Get("/evaluations?status=failed"))["results"].size(), 0U);
  EXPECT_EQ(http.Get("/evaluations?status=maybe")->status, 400);
  EXPECT_EQ(http.Get("/evaluations?batch_size=two")->status, 400);

  res = http.Get("/traces/" + view.results[0].trace_id);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(tracer::tree_from_json(body(res)).roots[0].span.name, "evaluation");
  res = http.Get("/traces/" + view.results[0].trace_id + "?format=flat");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(http.Get("/traces/nope")->status, 404);

  res = http.Get("/evaluations/" + id + "/summary");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(body(res)["summaries"].size(), 4U);
  res = http.Post("/summaries", json{{"evaluation_id", id}, {"prices", {{"gpu-a", 3.6}}}}.dump(),
                  "application/json");
  ASSERT_EQ(res->status, 200);
  const auto summaries = body(res)["summaries"];
  std::size_t priced = 0;
  for (const auto& s : summaries) priced += s["cost_per_million"].is_null() ? 0 : 1;
  EXPECT_EQ(priced, 2U);

  res = http.Get("/comparisons?a=" + id + "&b=" + id);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(body(res)["flipped"], 0);
  EXPECT_EQ(http.Get("/comparisons?a=" + id)->status, 400);
}

TEST_F(RestTest, ErrorStatuses) {
  cluster.add_agent("cpu-a", Accelerator::kCpu);
  auto req = request_for(cm_manifest(cluster.dir), {blob({1}, "x")});
  req.hardware.accelerator = Accelerator::kGpu;
  auto res = http.Post("/evaluations", to_json(req).dump(), "application/json");
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(body(res)["error"]["code"], "NoAgentSatisfiesConstraints");
  res = http.Post("/evaluations", "{not json", "application/json");
  EXPECT_EQ(res->status, 400);
  res = http.Post("/evaluations", json{{"model", "cm"}, {"files", {"a"}}, {"batch_sizes", {2, 1}}}.dump(),
                  "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(body(res)["error"]["field"], "batch_sizes[1]");
  res = http.Post("/evaluations", json{{"model", "absent"}, {"files", {"a"}}}.dump(),
                  "application/json");
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(http.Get("/evaluations/ev-unknown")->status, 404);
  EXPECT_EQ(http.Get("/evaluations/ev-unknown/summary")->status, 404);

  req.hardware = {};
  req.manifest->source.graph_path = cluster.dir.file("gone.json");
  res = http.Post("/evaluations", to_json(req).dump(), "application/json");
  ASSERT_EQ(res->status, 202);
  const auto id = body(res)["evaluation_id"].get<std::string>();
  http.Get("/evaluations/" + id + "?wait_ms=10000");
  res = http.Get("/evaluations/" + id + "/summary");
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(body(res)["error"]["code"], "NoSuccessfulResults");
}

TEST(RestServerTest, BindFailure) {
  auto registry = std::make_shared<registry::InMemoryRegistry>();
  Orchestrator orch(registry, std::make_shared<InMemoryResultStore>());
  RestServer first(orch, {});
  first.start();
  RestServer second(orch, {"127.0.0.1", first.port(), {}});
  try {
    second.start();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBindFailure);
  }
}

}  // namespace
}  // namespace evalmesh::orchestrator
