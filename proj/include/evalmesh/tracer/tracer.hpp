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
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "evalmesh/common/clock.hpp"
#include "evalmesh/tracer/span.hpp"

namespace evalmesh::tracer {

// Destination for completed spans, fed by the Collector's worker thread.
class SpanSink {
 public:
  virtual ~SpanSink() = default;
  virtual void publish(std::span<const Span> spans) = 0;
};

class CallbackSink final : public SpanSink {
 public:
  using Callback = std::function<void(std::span<const Span>)>;
  explicit CallbackSink(Callback cb) : cb_(std::move(cb)) {}
  void publish(std::span<const Span> spans) override { cb_(spans); }

 private:
  Callback cb_;
};

// Keeps published spans grouped by trace id; de-duplicates by span id.
class MemorySpanSink final : public SpanSink {
 public:
  void publish(std::span<const Span> spans) override;
  std::vector<Span> spans(const std::string& trace_id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::map<SpanId, Span>> by_trace_;
};

// Bounded asynchronous span queue. enqueue never blocks: when full, deep
// (LIBRARY/HARDWARE) spans are dropped first, then the incoming span.
class Collector {
 public:
  struct Options {
    std::size_t capacity = 4096;
    std::size_t max_batch = 64;
  };

  explicit Collector(std::shared_ptr<SpanSink> sink);
  Collector(std::shared_ptr<SpanSink> sink, Options options);
  ~Collector();

  Collector(const Collector&) = delete;
  Collector& operator=(const Collector&) = delete;

  void enqueue(Span span);
  // Waits until everything queued so far has been handed to the sink.
  bool flush(std::chrono::milliseconds timeout);
  // Stops the worker; when `drain` is false queued spans are discarded.
  void shutdown(bool drain);

  std::uint64_t dropped() const { return dropped_.load(); }
  std::uint64_t published() const { return published_.load(); }

 private:
  void run();

  std::shared_ptr<SpanSink> sink_;
  Options options_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<Span> queue_;
  bool stopping_ = false;
  bool drain_on_stop_ = true;
  bool busy_ = false;
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> published_{0};
  std::thread worker_;
};

// Records spans for any number of traces. Completed spans are retained per
// trace for export and forwarded to the optional collector.
class Tracer {
 public:
  explicit Tracer(Clock& clock, Collector* collector = nullptr)
      : clock_(clock), collector_(collector) {}

  // Returns kNullSpan without recording anything when `granularity` is unset
  // or `level` is deeper than it. Throws Error(kUnknownSpan) when `parent` is
  // not an open span of the same trace and Error(kInvalidArgument) when
  // `level` is shallower than the parent's.
  SpanId start_span(const std::string& trace_id, SpanId parent, TraceLevel level,
                    std::string name, std::optional<TraceLevel> granularity);
  // kNullSpan is a no-op returning nullopt. Throws Error(kUnknownSpan) for
  // ids that are not open and Error(kEndBeforeStart) if the clock ran
  // backwards.
  std::optional<Span> end_span(SpanId id);
  void tag(SpanId id, const std::string& key, const std::string& value);

  // Throws Error(kIncompleteTrace) while spans of the trace are open.
  TraceTree export_trace(const std::string& trace_id) const;
  void discard(const std::string& trace_id);

  std::uint64_t filtered() const { return filtered_.load(); }
  Clock& clock() const { return clock_; }

  static std::string new_trace_id();

 private:
  Clock& clock_;
  Collector* collector_;
  mutable std::mutex mu_;
  std::unordered_map<SpanId, Span> open_;
  std::unordered_map<std::string, std::vector<Span>> completed_;
  std::atomic<SpanId> next_id_{1};
  std::atomic<std::uint64_t> filtered_{0};
};

// What a unit of work needs to emit spans into a trace at the requested
// granularity. A default-constructed context records nothing.
struct TraceContext {
  Tracer* tracer = nullptr;
  std::string trace_id;
  std::optional<TraceLevel> granularity;

  bool enabled(TraceLevel level) const {
    return tracer != nullptr && granularity && level <= *granularity;
  }
  SpanId start(SpanId parent, TraceLevel level, std::string name) const;
  void end(SpanId id) const;
};

// Ends its span on scope exit.
class ScopedSpan {
 public:
  ScopedSpan(const TraceContext& ctx, SpanId parent, TraceLevel level,
             std::string name)
      : ctx_(ctx), id_(ctx.start(parent, level, std::move(name))) {}
  ~ScopedSpan();

  ScopedSpan(const ScopedSpan&) = delete;
  ScopedSpan& operator=(const ScopedSpan&) = delete;

  SpanId id() const { return id_; }
  void tag(const std::string& key, const std::string& value) const;
  void end();

 private:
  const TraceContext& ctx_;
  SpanId id_;
  bool ended_ = false;
};

}  // namespace evalmesh::tracer
