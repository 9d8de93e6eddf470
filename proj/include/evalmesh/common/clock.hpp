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
#include <cstdint>

namespace evalmesh {

// Microsecond clock used for spans and latency measurement. Injected so tests
// can drive time explicitly.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_us() const = 0;
  // Lets simulated work advance time: real clocks sleep, virtual ones jump.
  virtual void sleep_for_us(std::int64_t us) = 0;
};

class MonotonicClock final : public Clock {
 public:
  std::int64_t now_us() const override;
  void sleep_for_us(std::int64_t us) override;

  static MonotonicClock& instance();
};

class VirtualClock final : public Clock {
 public:
  explicit VirtualClock(std::int64_t start_us = 0) : now_(start_us) {}

  std::int64_t now_us() const override { return now_.load(); }
  void sleep_for_us(std::int64_t us) override { now_ += us; }
  void advance_us(std::int64_t us) { now_ += us; }
  void set_us(std::int64_t us) { now_ = us; }

 private:
  std::atomic<std::int64_t> now_;
};

// Wall-clock milliseconds since the epoch, for registry timestamps that
// travel between processes.
std::int64_t wall_clock_ms();

}  // namespace evalmesh
