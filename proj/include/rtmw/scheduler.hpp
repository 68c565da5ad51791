#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "rtmw/config.hpp"
#include "rtmw/graph.hpp"
#include "rtmw/job.hpp"
#include "rtmw/ready_queue.hpp"
#include "rtmw/task_set.hpp"
#include "rtmw/version_select.hpp"

namespace rtmw {

// GCD of all periodic, sporadic and graph-root periods. Throws ConfigError
// when there is no recurring task.
Nanos scheduler_tick_period(const TaskSet& tasks);

// Least common multiple of the recurring periods, nullopt on overflow or when
// there are none.
std::optional<Nanos> hyperperiod(const TaskSet& tasks);

// Ready queue that receives jobs of `task`: the shared queue 0 under GLOBAL,
// the task's virtual core under PARTITIONED.
std::size_t route(const PolicyConfig& config, const TaskSet& tasks, TaskId task);

std::size_t queue_count(const PolicyConfig& config);

// A job decided by the scheduler, before version selection.
struct Release {
  TaskId task;
  std::uint64_t seq = 0;
  Nanos abs_release = 0;
  Nanos abs_deadline = 0;
};

// Release bookkeeping owned by the scheduler context: periodic arrivals,
// pending sporadic/aperiodic activations and data-driven graph activations.
class ReleaseTracker {
 public:
  ReleaseTracker(const TaskSet& tasks, const PolicyConfig& config);

  // Sporadic: release at max(now, last + period). Aperiodic: release now.
  // Returns the scheduled release instant. Throws UsageError for other kinds.
  Nanos activate(TaskId task, Nanos now);

  // Time-triggered releases with arrival <= now (in task-id order; several
  // per task when the scheduler fell behind). `horizon` bounds arrivals
  // (exclusive) when set.
  std::vector<Release> collect_time_releases(Nanos now, std::optional<Nanos> horizon = {});

  // Data-driven releases at `now`. Fires each data-activated task as long as
  // check_activation holds, calling `reserve` for the consumed tokens.
  std::vector<Release> collect_graph_releases(Nanos now, const TokenAvailability& available,
                                              const std::function<void(ChannelId, std::size_t)>& reserve);

  // Next theoretical time-triggered arrival after `now`, if any.
  std::optional<Nanos> next_arrival() const;

  std::uint64_t released(TaskId task) const { return state_.at(task.index()).seq; }
  bool has_pending_activations() const;

 private:
  struct TaskState {
    std::uint64_t seq = 0;
    Nanos next_arrival = 0;
    std::optional<Nanos> last_release;
    std::deque<Nanos> pending;  // sporadic/aperiodic scheduled releases
    std::vector<Nanos> iteration_releases;  // roots: release of each iteration
  };

  Release make_release(TaskId task, Nanos abs_release);

  const TaskSet& tasks_;
  std::vector<TaskState> state_;
};

// Builds the job for a release: priority key and initially selected version.
Job make_job(const Release& release, const PolicyConfig& config, const TaskSet& tasks,
             const SelectionContext& selection, const AcceleratorRegistry* registry);

// Workers whose running job has lower effective priority than the head of a
// queue they may draw from, lowest-priority running job first. `running`
// holds each worker's current effective key (nullopt when idle or blocked).
std::vector<WorkerIndex> preemption_targets(const PolicyConfig& config,
                                            std::span<const ReadyQueue> queues,
                                            std::span<const std::optional<PriorityKey>> running);

// Best preempted job of a worker (highest effective priority), or nullptr.
Job* best_preempted(const std::vector<Job*>& preempted);

}  // namespace rtmw
