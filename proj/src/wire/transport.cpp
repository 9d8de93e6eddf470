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

#include "evalmesh/wire/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "evalmesh/common/error.hpp"

namespace evalmesh::wire {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string encode_frame_payload(std::string_view payload) {
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(payload.size() + 4);
  out.push_back(static_cast<char>((n >> 24) & 0xFF));
  out.push_back(static_cast<char>((n >> 16) & 0xFF));
  out.push_back(static_cast<char>((n >> 8) & 0xFF));
  out.push_back(static_cast<char>(n & 0xFF));
  out.append(payload);
  return out;
}

std::string encode_frame(const Message& m) {
  json j = {{"type", m.type}, {"id", m.id}, {"body", m.body}};
  return encode_frame_payload(j.dump());
}

Message decode_payload(std::string_view payload) {
  json j = json::parse(payload, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kProtocolError, "frame payload is not a JSON object");
  }
  if (!j.contains("type") || !j["type"].is_string()) {
    throw Error(ErrorCode::kProtocolError, "frame has no message type", "type");
  }
  Message m;
  m.type = j["type"].get<std::string>();
  if (j.contains("id") && j["id"].is_number_unsigned()) m.id = j["id"].get<std::uint64_t>();
  if (j.contains("body")) m.body = j["body"];
  return m;
}

Message error_message(std::uint64_t id, const std::exception& e) {
  Message m{kErrorType, id, json::object()};
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    m.body = {{"code", to_string(err->code())}, {"message", err->what()}, {"field", err->field()}};
  } else if (dynamic_cast<const json::exception*>(&e) != nullptr) {
    m.body = {{"code", to_string(ErrorCode::kProtocolError)}, {"message", e.what()}, {"field", ""}};
  } else {
    m.body = {{"code", to_string(ErrorCode::kInternal)}, {"message", e.what()}, {"field", ""}};
  }
  return m;
}

void raise_error(const Message& m) {
  const auto& b = m.body;
  throw Error(error_code_from_string(b.value("code", std::string("Internal"))),
              b.value("message", std::string("remote error")), b.value("field", std::string()));
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::kInvalidArgument, "expected host:port, got '" + std::string(text) + "'");
  }
  Endpoint ep{std::string(text.substr(0, colon)), 0};
  const auto port = text.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in '" + std::string(text) + "'");
  }
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

Socket::~Socket() { close(); }

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.fd_;
    o.fd_ = -1;
  }
  return *this;
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::write_all(std::string_view bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const auto n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kConnectionError, std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

namespace {

struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head != nullptr) freeaddrinfo(head);
  }
};

AddrInfo lookup(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  AddrInfo info;
  const auto port = std::to_string(ep.port);
  const int rc = getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints,
                             &info.head);
  if (rc != 0) {
    throw Error(passive ? ErrorCode::kBindFailure : ErrorCode::kConnectionError,
                "cannot resolve " + ep.to_string() + ": " + gai_strerror(rc));
  }
  return info;
}

// 1 readable, 0 timed out, -1 error.
int wait_readable(int fd, int timeout_ms) {
  pollfd p{fd, POLLIN, 0};
  while (true) {
    const int rc = ::poll(&p, 1, timeout_ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) return -1;
    return rc > 0 ? 1 : 0;
  }
}

}  // namespace

Socket connect_to(const Endpoint& ep, std::chrono::milliseconds timeout) {
  auto info = lookup(ep, false);
  std::string last = "no address";
  for (auto* ai = info.head; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) continue;
    const int flags = fcntl(s.fd(), F_GETFL, 0);
    fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      pollfd p{s.fd(), POLLOUT, 0};
      rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
      if (rc <= 0) {
        last = rc == 0 ? "timed out" : std::strerror(errno);
        continue;
      }
      int err = 0;
      socklen_t len = sizeof(err);
      getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    }
    if (rc < 0) {
      last = std::strerror(errno);
      continue;
    }
    fcntl(s.fd(), F_SETFL, flags);
    int one = 1;
    setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return s;
  }
  throw Error(ErrorCode::kConnectionError, "cannot connect to " + ep.to_string() + ": " + last);
}

ReadResult read_frame(int fd, std::optional<std::chrono::milliseconds> idle,
                      std::chrono::milliseconds stall, const std::atomic<bool>* stop,
                      std::uint32_t max_bytes) {
  constexpr int kTickMs = 50;
  unsigned char header[4];
  std::size_t have = 0;
  std::string payload;
  std::uint64_t need = 0;
  bool in_body = false;
  auto deadline = idle ? Clock::now() + *idle : Clock::time_point::max();
  bool started = false;

  while (true) {
    if (stop != nullptr && stop->load()) return {ReadStatus::kStopped, {}, 0};
    const auto now = Clock::now();
    if (now >= deadline) {
      return {started ? ReadStatus::kStalled : ReadStatus::kTimeout, {}, need};
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    const int wait = static_cast<int>(std::min<std::int64_t>(left.count() + 1, kTickMs));
    const int ready = wait_readable(fd, wait);
    if (ready < 0) return {ReadStatus::kClosed, {}, 0};
    if (ready == 0) continue;

    char buf[65536];
    std::size_t want = in_body ? std::min<std::uint64_t>(sizeof(buf), need - payload.size())
                               : 4 - have;
    const auto n = ::recv(fd, buf, want, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      return {started ? ReadStatus::kStalled : ReadStatus::kClosed, {}, need};
    }
    if (!started) started = true;
    deadline = Clock::now() + stall;
    if (!in_body) {
      std::memcpy(header + have, buf, static_cast<std::size_t>(n));
      have += static_cast<std::size_t>(n);
      if (have < 4) continue;
      need = (std::uint64_t{header[0]} << 24) | (std::uint64_t{header[1]} << 16) |
             (std::uint64_t{header[2]} << 8) | std::uint64_t{header[3]};
      if (need > max_bytes) return {ReadStatus::kOversize, {}, need};
      in_body = true;
      payload.reserve(need);
    } else {
      payload.append(buf, static_cast<std::size_t>(n));
    }
    if (in_body && payload.size() == need) return {ReadStatus::kFrame, std::move(payload), need};
  }
}

FrameServer::FrameServer(Handler handler, Options options)
    : handler_(std::move(handler)), options_(std::move(options)) {}

FrameServer::~FrameServer() { stop(); }

void FrameServer::start() {
  auto info = lookup({options_.host, options_.port}, true);
  std::string last = "no address";
  for (auto* ai = info.head; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) continue;
    int one = 1;
    setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) < 0 || ::listen(s.fd(), 64) < 0) {
      last = std::strerror(errno);
      continue;
    }
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    listener_ = std::move(s);
    break;
  }
  if (!listener_.valid()) {
    throw Error(ErrorCode::kBindFailure,
                "cannot listen on " + Endpoint{options_.host, options_.port}.to_string() + ": " +
                    last);
  }
  stopping_ = false;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void FrameServer::stop() {
  stopping_ = true;
  if (acceptor_.joinable()) acceptor_.join();
  listener_.close();
  reap(true);
}

void FrameServer::reap(bool all) {
  std::list<std::unique_ptr<Conn>> finished;
  {
    std::lock_guard lock(conns_mu_);
    for (auto it = conns_.begin(); it != conns_.end();) {
      if (all || (*it)->done) {
        if (all) (*it)->sock.shutdown();
        finished.push_back(std::move(*it));
        it = conns_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& c : finished) {
    if (c->thread.joinable()) c->thread.join();
  }
}

void FrameServer::accept_loop() {
  while (!stopping_) {
    if (wait_readable(listener_.fd(), 100) <= 0) continue;
    const int fd = ::accept(listener_.fd(), nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    reap(false);
    auto conn = std::make_unique<Conn>();
    conn->sock = Socket(fd);
    Conn* raw = conn.get();
    {
      std::lock_guard lock(conns_mu_);
      conns_.push_back(std::move(conn));
    }
    raw->thread = std::thread([this, raw] {
      serve(*raw);
      raw->sock.shutdown();
      raw->done = true;
    });
  }
}

void FrameServer::serve(Conn& conn) {
  auto reply = [&](const Message& m) {
    try {
      conn.sock.write_all(encode_frame(m));
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  while (!stopping_) {
    auto r = read_frame(conn.sock.fd(), std::nullopt, options_.stall_timeout, &stopping_,
                        options_.max_frame_bytes);
    switch (r.status) {
      case ReadStatus::kFrame:
        break;
      case ReadStatus::kStalled:
        if (!reply(error_message(0, Error(ErrorCode::kProtocolError,
                                          "incomplete frame: expected " +
                                              std::to_string(r.declared) + " bytes")))) {
          return;
        }
        continue;
      case ReadStatus::kOversize:
        reply(error_message(0, Error(ErrorCode::kProtocolError,
                                     "frame of " + std::to_string(r.declared) +
                                         " bytes exceeds the limit")));
        return;
      default:
        return;
    }
    Message req;
    try {
      req = decode_payload(r.payload);
    } catch (const std::exception& e) {
      if (!reply(error_message(0, e))) return;
      continue;
    }
    Message out{req.type, req.id, json::object()};
    try {
      out.body = handler_(req.type, req.body);
    } catch (const std::exception& e) {
      out = error_message(req.id, e);
    }
    if (!reply(out)) return;
  }
}

WireClient::WireClient(Endpoint ep, std::chrono::milliseconds timeout)
    : ep_(std::move(ep)), timeout_(timeout) {}

json WireClient::call(const std::string& type, const json& body) {
  return call(type, body, timeout_);
}

json WireClient::call(const std::string& type, const json& body,
                      std::chrono::milliseconds timeout) {
  std::lock_guard lock(mu_);
  Message m{type, next_id_++, body};
  const bool reused = sock_.valid();
  bool retryable = false;
  try {
    return call_once(m, timeout, retryable);
  } catch (const Error& e) {
    if (!reused || !retryable) throw;
  }
  // The cached connection had gone stale; one fresh attempt.
  return call_once(m, timeout, retryable);
}

json WireClient::call_once(const Message& m, std::chrono::milliseconds timeout,
                           bool& retryable) {
  retryable = false;
  if (!sock_.valid()) sock_ = connect_to(ep_, std::min(timeout, std::chrono::milliseconds(5000)));
  try {
    retryable = true;
    sock_.write_all(encode_frame(m));
    retryable = false;
    while (true) {
      auto r = read_frame(sock_.fd(), timeout, timeout, nullptr);
      if (r.status != ReadStatus::kFrame) {
        retryable = r.status == ReadStatus::kClosed;
        throw Error(ErrorCode::kConnectionError,
                    r.status == ReadStatus::kTimeout
                        ? "no reply from " + ep_.to_string() + " within " +
                              std::to_string(timeout.count()) + " ms"
                        : "connection to " + ep_.to_string() + " lost");
      }
      auto reply = decode_payload(r.payload);
      if (reply.id != m.id && reply.id != 0) continue;
      if (reply.type == kErrorType) raise_error(reply);
      return reply.body;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConnectionError || e.code() == ErrorCode::kProtocolError) {
      sock_.close();
    }
    throw;
  }
}

}  // namespace evalmesh::wire
