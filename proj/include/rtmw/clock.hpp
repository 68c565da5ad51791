#pragma once

#include "rtmw/config.hpp"
#include "rtmw/time.hpp"

namespace rtmw {

// Monotonic time since the schedule's start instant.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Nanos now() const = 0;
  // Blocks (or, for virtual time, advances) until now() >= t.
  virtual void wait_until(Nanos t) = 0;
};

// Advances only when told to; used by the simulator.
class VirtualClock final : public Clock {
 public:
  Nanos now() const override { return now_; }
  void wait_until(Nanos t) override;
  void advance_to(Nanos t) { wait_until(t); }

 private:
  Nanos now_ = 0;
};

// CLOCK_MONOTONIC relative to the instant the clock was constructed or
// restarted. Waiting sleeps on an absolute deadline or busy-polls.
class MonotonicClock final : public Clock {
 public:
  explicit MonotonicClock(WaitingStrategy strategy = WaitingStrategy::kSleep);

  Nanos now() const override;
  void wait_until(Nanos t) override;
  void restart();
  WaitingStrategy strategy() const { return strategy_; }

  // Raw CLOCK_MONOTONIC reading.
  static Nanos host_now();

 private:
  WaitingStrategy strategy_;
  Nanos origin_ = 0;
};

}  // namespace rtmw
