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

#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

#include "evalmesh/orchestrator/orchestrator.hpp"
#include "evalmesh/wire/transport.hpp"

namespace httplib {
class Server;
}

namespace evalmesh::orchestrator {

// HTTP status for an error code: 400 for bad input, 404 for unknown ids,
// 409 for conflicts, 422 when nothing can be summarized, 500 otherwise.
int http_status(ErrorCode code);
nlohmann::json error_body(const Error& e);

// Query-string filters of GET /evaluations.
HistoryFilter history_filter_from_params(const std::multimap<std::string, std::string>& params);

// JSON REST surface over an Orchestrator.
class RestServer {
 public:
  struct Options {
    std::string host = "127.0.0.1";
    int port = 0;
    PriceTable prices;
  };

  RestServer(Orchestrator& orchestrator, Options options);
  ~RestServer();
  RestServer(const RestServer&) = delete;
  RestServer& operator=(const RestServer&) = delete;

  // Throws Error(kBindFailure).
  void start();
  void stop();
  int port() const { return port_; }

 private:
  void routes();

  Orchestrator& orch_;
  Options options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

// The wire endpoint agents talk to plus the REST endpoint clients talk to.
class OrchestratorServer {
 public:
  struct Options {
    std::string host = "127.0.0.1";
    int wire_port = 0;
    int rest_port = 0;
    PriceTable prices;
    Orchestrator::Options orchestrator;
  };

  OrchestratorServer(std::shared_ptr<registry::RegistryStore> registry,
                     std::shared_ptr<ResultStore> results, Options options);
  ~OrchestratorServer();

  void start();
  void stop();

  Orchestrator& orchestrator() { return orch_; }
  int wire_port() const { return wire_.port(); }
  int rest_port() const { return rest_.port(); }
  std::string wire_address() const;
  std::string rest_url() const;

 private:
  Options options_;
  Orchestrator orch_;
  wire::FrameServer wire_;
  RestServer rest_;
};

}  // namespace evalmesh::orchestrator
