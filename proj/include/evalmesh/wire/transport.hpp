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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

namespace evalmesh::wire {

// One frame is a 4-byte big-endian payload length followed by a UTF-8 JSON
// object {type, id, body}. Replies reuse the request id; failures come back
// as {type: "Error", body: {code, message, field}}.
inline constexpr std::uint32_t kMaxFrameBytes = 64U << 20;
inline constexpr const char* kErrorType = "Error";

struct Message {
  std::string type;
  std::uint64_t id = 0;
  nlohmann::json body = nlohmann::json::object();
};

std::string encode_frame(const Message& m);
std::string encode_frame_payload(std::string_view payload);
// Throws Error(kProtocolError) for invalid JSON or a missing type.
Message decode_payload(std::string_view payload);

Message error_message(std::uint64_t id, const std::exception& e);
// Throws the Error carried by an error message.
[[noreturn]] void raise_error(const Message& m);

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
  std::string to_string() const;
};
// "host:port"; throws Error(kInvalidArgument).
Endpoint parse_endpoint(std::string_view text);

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void shutdown();
  void close();

  // Throws Error(kConnectionError).
  void write_all(std::string_view bytes);

 private:
  int fd_ = -1;
};

// Throws Error(kConnectionError) when the peer cannot be reached in time.
Socket connect_to(const Endpoint& ep, std::chrono::milliseconds timeout);

enum class ReadStatus { kFrame, kClosed, kStalled, kOversize, kTimeout, kStopped };

struct ReadResult {
  ReadStatus status = ReadStatus::kClosed;
  std::string payload;
  std::uint64_t declared = 0;
};

// Waits up to `idle` (forever when unset) for a frame to begin; once bytes
// arrive, a pause longer than `stall` yields kStalled with the partial bytes
// discarded. `stop` is polled while waiting.
ReadResult read_frame(int fd, std::optional<std::chrono::milliseconds> idle,
                      std::chrono::milliseconds stall, const std::atomic<bool>* stop,
                      std::uint32_t max_bytes = kMaxFrameBytes);

// Frame server with one thread per connection. The handler gets the request
// type and body and returns the reply body; thrown errors become error
// replies. A frame that stalls mid-way gets a ProtocolError reply and the
// connection keeps serving; an oversize frame is answered and the connection
// closed.
class FrameServer {
 public:
  using Handler = std::function<nlohmann::json(const std::string& type, const nlohmann::json& body)>;

  struct Options {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
    std::chrono::milliseconds stall_timeout{2000};
    std::uint32_t max_frame_bytes = kMaxFrameBytes;
  };

  FrameServer(Handler handler, Options options);
  ~FrameServer();
  FrameServer(const FrameServer&) = delete;
  FrameServer& operator=(const FrameServer&) = delete;

  // Throws Error(kBindFailure).
  void start();
  void stop();
  std::uint16_t port() const { return port_; }
  Endpoint endpoint() const { return {options_.host, port_}; }

 private:
  struct Conn {
    Socket sock;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void serve(Conn& conn);
  void reap(bool all);

  Handler handler_;
  Options options_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex conns_mu_;
  std::list<std::unique_ptr<Conn>> conns_;
};

// Request/reply client over one persistent connection, reconnecting once
// when the connection has gone away. Calls are serialized.
class WireClient {
 public:
  explicit WireClient(Endpoint ep, std::chrono::milliseconds timeout = std::chrono::seconds(30));

  // Returns the reply body; rethrows error replies as Error. Transport
  // failures throw Error(kConnectionError).
  nlohmann::json call(const std::string& type, const nlohmann::json& body);
  nlohmann::json call(const std::string& type, const nlohmann::json& body,
                      std::chrono::milliseconds timeout);

  const Endpoint& endpoint() const { return ep_; }

 private:
  nlohmann::json call_once(const Message& m, std::chrono::milliseconds timeout, bool& retryable);

  Endpoint ep_;
  std::chrono::milliseconds timeout_;
  std::mutex mu_;
  Socket sock_;
  std::uint64_t next_id_ = 1;
};

}  // namespace evalmesh::wire
