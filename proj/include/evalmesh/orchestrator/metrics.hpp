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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evalmesh/wire/messages.hpp"

namespace evalmesh::orchestrator {

struct LatencyStats {
  double min_us = 0;
  double mean_us = 0;
  double p50_us = 0;
  double p99_us = 0;
  double max_us = 0;
  friend bool operator==(const LatencyStats&, const LatencyStats&) = default;
};

// Linear interpolation between closest ranks; `q` in [0, 1].
double percentile(std::vector<double> values, double q);
LatencyStats latency_stats(const std::vector<double>& values_us);

double throughput(std::int64_t batch_size, double mean_latency_us);
double cost_per_million(double price_per_hour, double images_per_second);

struct MetricSummary {
  std::string agent_id;
  std::int64_t batch_size = 1;
  std::size_t batches = 0;
  LatencyStats latency;
  double throughput = 0;
  std::optional<double> cost_per_million;
  friend bool operator==(const MetricSummary&, const MetricSummary&) = default;
};

// Dollars per hour, keyed by agent id or by any hardware label value.
using PriceTable = std::map<std::string, double>;
PriceTable parse_price_table(const nlohmann::json& j);

// One summary per (agent, batch size) over the ok results, ordered by
// (agent_id, batch_size). Throws Error(kNoSuccessfulResults).
std::vector<MetricSummary> summarize(const std::vector<wire::EvaluationResult>& results,
                                     const PriceTable& prices = {});

nlohmann::json to_json(const MetricSummary& s);
MetricSummary summary_from_json(const nlohmann::json& j);

}  // namespace evalmesh::orchestrator
