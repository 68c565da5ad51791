#include "rtmw/clock.hpp"

#include <time.h>

#include <cerrno>

namespace rtmw {

void VirtualClock::wait_until(Nanos t) {
  if (t > now_) now_ = t;
}

MonotonicClock::MonotonicClock(WaitingStrategy strategy) : strategy_(strategy), origin_(host_now()) {}

Nanos MonotonicClock::host_now() {
  timespec ts{};
  clock_gettime(CLOCK_MONOTONIC, &ts);
  return static_cast<Nanos>(ts.tv_sec) * kSecond + ts.tv_nsec;
}

Nanos MonotonicClock::now() const { return host_now() - origin_; }

void MonotonicClock::restart() { origin_ = host_now(); }

void MonotonicClock::wait_until(Nanos t) {
  const Nanos target = origin_ + t;
  if (strategy_ == WaitingStrategy::kSpin) {
    while (host_now() < target) {
    }
    return;
  }
  timespec ts{};
  ts.tv_sec = target / kSecond;
  ts.tv_nsec = target % kSecond;
  while (clock_nanosleep(CLOCK_MONOTONIC, TIMER_ABSTIME, &ts, nullptr) == EINTR) {
  }
}

}  // namespace rtmw
