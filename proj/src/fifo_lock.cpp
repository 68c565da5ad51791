#include "rtmw/fifo_lock.hpp"

#include "rtmw/clock.hpp"
#include "rtmw/error.hpp"

namespace rtmw {

FifoLock::FifoLock(LockingStrategy strategy) : strategy_(strategy) {}

Nanos FifoLock::lock() {
  const auto self = std::this_thread::get_id();
  if (owner_.load(std::memory_order_acquire) == self) throw UsageError("FifoLock is not reentrant");
  const Nanos begin = MonotonicClock::host_now();
  const std::uint64_t ticket = next_.fetch_add(1, std::memory_order_acq_rel);
  if (strategy_ == LockingStrategy::kLockFree) {
    while (serving_.load(std::memory_order_acquire) != ticket) std::this_thread::yield();
  } else if (serving_.load(std::memory_order_acquire) != ticket) {
    std::unique_lock lk(mutex_);
    cv_.wait(lk, [&] { return serving_.load(std::memory_order_acquire) == ticket; });
  }
  owner_.store(self, std::memory_order_release);
  return MonotonicClock::host_now() - begin;
}

void FifoLock::unlock() {
  if (owner_.load(std::memory_order_acquire) != std::this_thread::get_id()) {
    throw UsageError("FifoLock released by a thread that does not hold it");
  }
  owner_.store(std::thread::id{}, std::memory_order_release);
  if (strategy_ == LockingStrategy::kLockFree) {
    serving_.fetch_add(1, std::memory_order_acq_rel);
    return;
  }
  {
    std::lock_guard lk(mutex_);
    serving_.fetch_add(1, std::memory_order_acq_rel);
  }
  cv_.notify_all();
}

}  // namespace rtmw
