#pragma once

#include <cstdint>
#include <optional>

#include "rtmw/ids.hpp"
#include "rtmw/priority.hpp"
#include "rtmw/time.hpp"

namespace rtmw {

enum class JobState { kReady, kRunning, kPreempted, kCompleted };

// One activation of a task. The worker is fixed at first dispatch; jobs
// never migrate.
struct Job {
  TaskId task;
  std::uint64_t seq = 0;
  VersionId version;
  Nanos abs_release = 0;
  Nanos abs_deadline = 0;
  PriorityKey key;
  // Set while this job holds an accelerator a higher-priority job waits for.
  std::optional<PriorityKey> inherited;
  JobState state = JobState::kReady;
  std::optional<WorkerIndex> worker;

  PriorityKey effective_key() const {
    return inherited && inherited->higher_than(key) ? *inherited : key;
  }
};

}  // namespace rtmw
