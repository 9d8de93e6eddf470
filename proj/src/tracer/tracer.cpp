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

#include "evalmesh/tracer/tracer.hpp"

#include <algorithm>
#include <random>

#include "evalmesh/common/error.hpp"

namespace evalmesh::tracer {

void MemorySpanSink::publish(std::span<const Span> spans) {
  std::lock_guard lock(mu_);
  for (const auto& s : spans) by_trace_[s.trace_id][s.id] = s;
}

std::vector<Span> MemorySpanSink::spans(const std::string& trace_id) const {
  std::lock_guard lock(mu_);
  std::vector<Span> out;
  if (auto it = by_trace_.find(trace_id); it != by_trace_.end()) {
    for (const auto& [id, s] : it->second) out.push_back(s);
  }
  return out;
}

std::size_t MemorySpanSink::size() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [id, spans] : by_trace_) n += spans.size();
  return n;
}

Collector::Collector(std::shared_ptr<SpanSink> sink)
    : Collector(std::move(sink), Options{}) {}

Collector::Collector(std::shared_ptr<SpanSink> sink, Options options)
    : sink_(std::move(sink)), options_(options) {
  worker_ = std::thread([this] { run(); });
}

Collector::~Collector() { shutdown(false); }

void Collector::enqueue(Span span) {
  {
    std::lock_guard lock(mu_);
    if (stopping_) {
      ++dropped_;
      return;
    }
    if (queue_.size() >= options_.capacity) {
      if (span.level >= TraceLevel::kLibrary) {
        ++dropped_;
        return;
      }
      auto victim = std::find_if(queue_.rbegin(), queue_.rend(), [](const Span& s) {
        return s.level >= TraceLevel::kLibrary;
      });
      if (victim == queue_.rend()) {
        ++dropped_;
        return;
      }
      queue_.erase(std::next(victim).base());
      ++dropped_;
    }
    queue_.push_back(std::move(span));
  }
  cv_.notify_one();
}

bool Collector::flush(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  return idle_cv_.wait_for(lock, timeout, [this] { return queue_.empty() && !busy_; });
}

void Collector::shutdown(bool drain) {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && !worker_.joinable()) return;
    stopping_ = true;
    drain_on_stop_ = drain;
    if (!drain) queue_.clear();
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void Collector::run() {
  std::unique_lock lock(mu_);
  while (true) {
    cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (queue_.empty() || (stopping_ && !drain_on_stop_)) {
      if (stopping_) break;
      continue;
    }
    std::vector<Span> batch;
    while (!queue_.empty() && batch.size() < options_.max_batch) {
      batch.push_back(std::move(queue_.front()));
      queue_.pop_front();
    }
    busy_ = true;
    lock.unlock();
    try {
      sink_->publish(batch);
      published_ += batch.size();
    } catch (...) {
      dropped_ += batch.size();
    }
    lock.lock();
    busy_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
  busy_ = false;
  idle_cv_.notify_all();
}

SpanId Tracer::start_span(const std::string& trace_id, SpanId parent,
                          TraceLevel level, std::string name,
                          std::optional<TraceLevel> granularity) {
  if (!granularity || level > *granularity) {
    ++filtered_;
    return kNullSpan;
  }
  std::lock_guard lock(mu_);
  if (parent != kNullSpan) {
    auto it = open_.find(parent);
    if (it == open_.end() || it->second.trace_id != trace_id) {
      throw Error(ErrorCode::kUnknownSpan,
                  "parent span " + std::to_string(parent) + " is not open");
    }
    if (level < it->second.level) {
      throw Error(ErrorCode::kInvalidArgument,
                  "span " + name + " is shallower than its parent");
    }
  }
  Span s;
  s.id = next_id_++;
  s.parent = parent;
  s.trace_id = trace_id;
  s.level = level;
  s.name = std::move(name);
  s.begin_us = clock_.now_us();
  SpanId id = s.id;
  open_.emplace(id, std::move(s));
  return id;
}

std::optional<Span> Tracer::end_span(SpanId id) {
  if (id == kNullSpan) return std::nullopt;
  Span s;
  {
    std::lock_guard lock(mu_);
    auto it = open_.find(id);
    if (it == open_.end()) {
      throw Error(ErrorCode::kUnknownSpan, "span " + std::to_string(id) + " is not open");
    }
    const auto now = clock_.now_us();
    if (now < it->second.begin_us) {
      throw Error(ErrorCode::kEndBeforeStart,
                  "span " + it->second.name + " would end before it began");
    }
    s = std::move(it->second);
    open_.erase(it);
    s.end_us = now;
    completed_[s.trace_id].push_back(s);
  }
  if (collector_ != nullptr) collector_->enqueue(s);
  return s;
}

void Tracer::tag(SpanId id, const std::string& key, const std::string& value) {
  if (id == kNullSpan) return;
  std::lock_guard lock(mu_);
  auto it = open_.find(id);
  if (it == open_.end()) {
    throw Error(ErrorCode::kUnknownSpan, "span " + std::to_string(id) + " is not open");
  }
  it->second.tags[key] = value;
}

TraceTree Tracer::export_trace(const std::string& trace_id) const {
  std::vector<Span> spans;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, s] : open_) {
      if (s.trace_id == trace_id) {
        throw Error(ErrorCode::kIncompleteTrace,
                    "trace " + trace_id + " has open span " + s.name);
      }
    }
    if (auto it = completed_.find(trace_id); it != completed_.end()) {
      spans = it->second;
    }
  }
  return build_tree(trace_id, std::move(spans));
}

void Tracer::discard(const std::string& trace_id) {
  std::lock_guard lock(mu_);
  completed_.erase(trace_id);
  std::erase_if(open_, [&](const auto& kv) { return kv.second.trace_id == trace_id; });
}

std::string Tracer::new_trace_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  for (int word = 0; word < 2; ++word) {
    auto v = rng();
    for (int i = 0; i < 16; ++i) {
      id += kHex[v & 15];
      v >>= 4;
    }
  }
  return id;
}

SpanId TraceContext::start(SpanId parent, TraceLevel level, std::string name) const {
  if (tracer == nullptr) return kNullSpan;
  return tracer->start_span(trace_id, parent, level, std::move(name), granularity);
}

void TraceContext::end(SpanId id) const {
  if (tracer != nullptr) tracer->end_span(id);
}

ScopedSpan::~ScopedSpan() {
  try {
    end();
  } catch (...) {
  }
}

void ScopedSpan::tag(const std::string& key, const std::string& value) const {
  if (ctx_.tracer != nullptr) ctx_.tracer->tag(id_, key, value);
}

void ScopedSpan::end() {
  if (ended_) return;
  ended_ = true;
  ctx_.end(id_);
}

}  // namespace evalmesh::tracer
