#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <thread>

#include "rtmw/config.hpp"
#include "rtmw/time.hpp"

namespace rtmw {

// Non-reentrant mutual exclusion granting access strictly in request order.
// kLockFree spins on a ticket counter; kOsLock parks waiters on a condition
// variable. Both admit in ticket order.
class FifoLock {
 public:
  explicit FifoLock(LockingStrategy strategy = LockingStrategy::kOsLock);
  FifoLock(const FifoLock&) = delete;
  FifoLock& operator=(const FifoLock&) = delete;

  // Returns the time spent waiting (ns). Throws UsageError when the calling
  // thread already holds the lock.
  Nanos lock();
  void unlock();

  // Ticket the next lock() will receive; exposes admission order to tests.
  std::uint64_t next_ticket() const { return next_.load(std::memory_order_acquire); }
  LockingStrategy strategy() const { return strategy_; }

 private:
  LockingStrategy strategy_;
  std::atomic<std::uint64_t> next_{0};
  std::atomic<std::uint64_t> serving_{0};
  std::atomic<std::thread::id> owner_{};
  std::mutex mutex_;
  std::condition_variable cv_;
};

class FifoGuard {
 public:
  explicit FifoGuard(FifoLock& lock) : lock_(&lock), wait_(lock.lock()) {}
  ~FifoGuard() {
    if (lock_) lock_->unlock();
  }
  FifoGuard(const FifoGuard&) = delete;
  FifoGuard& operator=(const FifoGuard&) = delete;

  Nanos waited() const { return wait_; }

 private:
  FifoLock* lock_;
  Nanos wait_;
};

}  // namespace rtmw
