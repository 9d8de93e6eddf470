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

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evalmesh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

inline constexpr const char* kAddressEnv = "EVALMESH_ORCHESTRATOR";
inline constexpr const char* kConfigEnv = "EVALMESH_CONFIG";
inline constexpr const char* kDefaultAddress = "http://127.0.0.1:8080";

// Where to find the orchestrator's REST endpoint, first hit wins:
// --orchestrator, $EVALMESH_ORCHESTRATOR, the "orchestrator" key of the JSON
// config file (--config, $EVALMESH_CONFIG, ~/.config/evalmesh/config.json).
struct AddressSources {
  std::optional<std::string> flag;
  std::optional<std::string> config_path;
  std::map<std::string, std::string> env;
};
std::string resolve_address(const AddressSources& sources);

// Runs one command line (without the program name). Returns the exit code.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Ends a running `serve` subcommand; installed as the SIGINT/SIGTERM action.
void request_stop();

}  // namespace evalmesh::cli
