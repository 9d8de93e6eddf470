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

#include "evalmesh/orchestrator/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evalmesh/common/error.hpp"

namespace evalmesh::orchestrator {

using nlohmann::json;

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "percentile of an empty series");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + (values[hi] - values[lo]) * frac;
}

LatencyStats latency_stats(const std::vector<double>& v) {
  if (v.empty()) throw Error(ErrorCode::kInvalidArgument, "latency series is empty");
  LatencyStats s;
  s.min_us = *std::min_element(v.begin(), v.end());
  s.max_us = *std::max_element(v.begin(), v.end());
  s.mean_us = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.p50_us = percentile(v, 0.50);
  s.p99_us = percentile(v, 0.99);
  return s;
}

double throughput(std::int64_t batch_size, double mean_latency_us) {
  if (mean_latency_us <= 0) return 0.0;
  return static_cast<double>(batch_size) * 1e6 / mean_latency_us;
}

double cost_per_million(double price_per_hour, double images_per_second) {
  if (images_per_second <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "cost needs a positive throughput");
  }
  return price_per_hour * 1e6 / (3600.0 * images_per_second);
}

PriceTable parse_price_table(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "price table must be an object");
  PriceTable out;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number() || value.get<double>() < 0) {
      throw Error(ErrorCode::kInvalidArgument, "price must be a non-negative number", key);
    }
    out[key] = value.get<double>();
  }
  return out;
}

namespace {

std::optional<double> price_for(const wire::EvaluationResult& r, const PriceTable& prices) {
  if (auto it = prices.find(r.agent_id); it != prices.end()) return it->second;
  for (const auto& [k, v] : r.hardware.labels) {
    if (auto it = prices.find(v); it != prices.end()) return it->second;
  }
  return std::nullopt;
}

}  // namespace

std::vector<MetricSummary> summarize(const std::vector<wire::EvaluationResult>& results,
                                     const PriceTable& prices) {
  std::map<std::pair<std::string, std::int64_t>, std::vector<const wire::EvaluationResult*>>
      groups;
  for (const auto& r : results) {
    if (r.ok() && !r.latencies_us.empty()) groups[{r.agent_id, r.batch_size}].push_back(&r);
  }
  if (groups.empty()) {
    throw Error(ErrorCode::kNoSuccessfulResults, "no successful results to summarize");
  }
  std::vector<MetricSummary> out;
  for (const auto& [key, members] : groups) {
    std::vector<double> series;
    for (const auto* r : members) {
      for (auto us : r->latencies_us) series.push_back(static_cast<double>(us));
    }
    MetricSummary s;
    s.agent_id = key.first;
    s.batch_size = key.second;
    s.batches = series.size();
    s.latency = latency_stats(series);
    s.throughput = throughput(s.batch_size, s.latency.mean_us);
    if (auto price = price_for(*members.front(), prices); price && s.throughput > 0) {
      s.cost_per_million = cost_per_million(*price, s.throughput);
    }
    out.push_back(s);
  }
  return out;
}

json to_json(const MetricSummary& s) {
  json j = {{"agent_id", s.agent_id},
            {"batch_size", s.batch_size},
            {"batches", s.batches},
            {"latency_us",
             {{"min", s.latency.min_us},
              {"mean", s.latency.mean_us},
              {"p50", s.latency.p50_us},
              {"p99", s.latency.p99_us},
              {"max", s.latency.max_us}}},
            {"throughput", s.throughput}};
  j["cost_per_million"] = s.cost_per_million ? json(*s.cost_per_million) : json();
  return j;
}

MetricSummary summary_from_json(const json& j) {
  MetricSummary s;
  s.agent_id = j.at("agent_id").get<std::string>();
  s.batch_size = j.at("batch_size").get<std::int64_t>();
  s.batches = j.value("batches", std::size_t{0});
  const auto& l = j.at("latency_us");
  s.latency = {l.at("min").get<double>(), l.at("mean").get<double>(), l.at("p50").get<double>(),
               l.at("p99").get<double>(), l.at("max").get<double>()};
  s.throughput = j.at("throughput").get<double>();
  if (j.contains("cost_per_million") && !j["cost_per_million"].is_null()) {
    s.cost_per_million = j["cost_per_million"].get<double>();
  }
  return s;
}

}  // namespace evalmesh::orchestrator
