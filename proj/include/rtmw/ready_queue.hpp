#pragma once

#include <cstddef>
#include <vector>

#include "rtmw/job.hpp"

namespace rtmw {

// Jobs ordered by effective priority key; head is the highest priority.
// Callers hold the queue's FifoLock.
class ReadyQueue {
 public:
  void insert(Job* job) { jobs_.push_back(job); }
  // Returns the number of element moves (see sort_ready).
  std::size_t sort();

  bool empty() const { return jobs_.empty(); }
  std::size_t size() const { return jobs_.size(); }
  Job* head() const { return jobs_.empty() ? nullptr : jobs_.front(); }
  Job* pop_head();

  const std::vector<Job*>& jobs() const { return jobs_; }
  void clear() { jobs_.clear(); }

 private:
  std::vector<Job*> jobs_;
};

}  // namespace rtmw
