#pragma once

#include <memory>

#include "rtmw/realtime.hpp"
#include "rtmw/schedule_table.hpp"
#include "rtmw/task_set.hpp"
#include "rtmw/trace.hpp"
#include "rtmw/version_select.hpp"

namespace rtmw {

class Middleware;

// Threads of one started schedule. Owns copies of the model so the
// middleware may be modified once the schedule has drained.
class RealtimeEngine {
 public:
  RealtimeEngine(const Middleware& middleware, const RealtimeOptions& options);
  ~RealtimeEngine();
  RealtimeEngine(const RealtimeEngine&) = delete;
  RealtimeEngine& operator=(const RealtimeEngine&) = delete;

  void start();
  void activate(TaskId task);
  // Stops releases; queued and running jobs still complete.
  void stop();
  // Waits until every released job has completed and joins all threads.
  void join();
  bool joined() const;

  // Merged, finalized trace. Requires join().
  const Trace& trace() const;
  std::vector<std::string> warnings() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace rtmw
