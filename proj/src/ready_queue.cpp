#include "rtmw/ready_queue.hpp"

namespace rtmw {

std::size_t ReadyQueue::sort() { return sort_ready(jobs_); }

Job* ReadyQueue::pop_head() {
  if (jobs_.empty()) return nullptr;
  Job* job = jobs_.front();
  jobs_.erase(jobs_.begin());
  return job;
}

}  // namespace rtmw
