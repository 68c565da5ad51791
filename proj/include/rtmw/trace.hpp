#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtmw/ids.hpp"
#include "rtmw/time.hpp"

namespace rtmw {

enum class TraceKind : std::uint8_t {
  kReleaseTheoretical,  // payload: absolute deadline
  kReleaseEffective,    // payload: release overhead (effective - theoretical)
  kJobStart,
  kPreempt,             // payload: context-switch cost charged
  kResume,              // payload: context-switch cost charged
  kJobComplete,         // payload: response time
  kDeadlineMiss,        // payload: lateness
  kLockWait,            // payload: wait from request to grant
  kTickBegin,
  kTickEnd,             // payload: scheduling time (end - begin)
  kAccelAcquire,        // payload: accelerator id
  kAccelRelease,        // payload: accelerator id
  kOverrun,             // payload: lateness of the late step or table entry
  kGetTask,             // payload: queue critical-section duration
  kChannelPush,         // payload: channel id
  kChannelPop,          // payload: channel id
  kAccelBlocked,        // payload: accelerator id
  kInherit,             // payload: task id of the requester lending its priority
};

std::string_view to_string(TraceKind kind);
std::optional<TraceKind> parse_trace_kind(std::string_view s);

struct TraceEvent {
  Nanos timestamp = 0;
  TraceKind kind = TraceKind::kJobStart;
  std::int32_t task = -1;
  std::int64_t job_seq = -1;
  WorkerIndex worker = kSchedulerContext;
  std::int64_t payload = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct Trace {
  std::vector<std::string> task_names;
  std::vector<TraceEvent> events;
  Nanos end_time = 0;

  void add(const TraceEvent& e) { events.push_back(e); }
  // Stable sort by timestamp; ties keep emission order.
  void finalize();

  std::vector<TraceEvent> of_kind(TraceKind kind) const;
  std::vector<TraceEvent> of_task(std::int32_t task) const;
};

// One event per line: timestamp_ns,kind,task,job_seq,worker,payload.
void write_trace_csv(const Trace& trace, std::ostream& out);
Trace read_trace_csv(std::istream& in);

// Summary statistics over durations.
struct Stats {
  std::uint64_t count = 0;
  Nanos total = 0;
  Nanos min = 0;
  Nanos max = 0;

  void add(Nanos v);
  double mean() const { return count ? static_cast<double>(total) / static_cast<double>(count) : 0.0; }
};

struct OverheadReport {
  Stats get_task;
  Stats scheduling;
  Stats release_overhead;
  Stats worker_lock_wait;
  Stats scheduler_lock_wait;
  std::uint64_t preemptions = 0;
  std::uint64_t context_switches = 0;
  Nanos preemption_overhead = 0;
  std::uint64_t overruns = 0;
};

struct TaskReport {
  std::string name;
  std::uint64_t released = 0;
  std::uint64_t completed = 0;
  std::uint64_t misses = 0;
  Stats response;
};

struct RunReport {
  std::string policy;
  Nanos horizon = 0;
  std::uint64_t seed = 0;
  std::vector<TaskReport> tasks;
  std::uint64_t released = 0;
  std::uint64_t completed = 0;
  std::uint64_t misses = 0;
  std::uint64_t truncated = 0;
  OverheadReport overheads;
  std::vector<std::string> warnings;

  double miss_ratio() const {
    return released ? static_cast<double>(misses) / static_cast<double>(released) : 0.0;
  }
  Stats response() const;
};

// Overhead section derived from a finalized trace. Throws TraceIntegrityError
// for unmatched events (start without release, completion without start,
// resume without preemption). Jobs started but not completed count as
// truncated, not as errors.
OverheadReport compute_overheads(const Trace& trace);

// Per-task and per-run metrics from a finalized trace.
RunReport build_report(const Trace& trace);

}  // namespace rtmw
