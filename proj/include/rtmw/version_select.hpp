#pragma once

#include <span>
#include <vector>

#include "rtmw/config.hpp"
#include "rtmw/task_model.hpp"

namespace rtmw {

struct TaskSet;
struct Job;
class AcceleratorRegistry;

// Global inputs to version selection. The masks may change between jobs
// (mode switches from job bodies).
struct SelectionContext {
  Nanos now = 0;
  ModeMask execution_mode = 0;
  ModeMask permission_mask = 0;
  // When set, replaces the per-version battery callbacks.
  BatteryProbe battery_probe;
  // ENERGY_TIME weight of the time term, in [0, 1].
  double alpha = 0.5;
};

// What a USER selector sees.
struct SelectionRequest {
  const TaskSet* tasks = nullptr;
  TaskId task;
  std::span<const VersionId> candidates;
  const SelectionContext* context = nullptr;
};

// Versions of `task` none of whose accelerators is currently held, in
// declaration order.
std::vector<VersionId> eligible_versions(const TaskSet& tasks, TaskId task,
                                         const AcceleratorRegistry& registry);

// Applies `method` to a non-empty candidate list.
//   ENERGY       budget-feasible versions, fastest wcet; else cheapest budget
//   ENERGY_TIME  min alpha*t/max_t + (1-alpha)*e/max_e over the task's versions
//   MODE         first candidate whose mode_mask meets execution_mode
//   BITMASK      first candidate whose permission_mask meets permission_mask
//   USER         the task's selector; result must be a candidate
//   PRESELECTED  first candidate
// Ties resolve to declaration order. Throws SelectionError.
VersionId select_version(const TaskSet& tasks, TaskId task, const SelectionContext& ctx,
                         VersionSelection method, std::span<const VersionId> candidates);

// Busy-avoiding selection: selects among eligible versions, falling back to
// all versions (the job will then block on an accelerator) when none is
// eligible or, for MODE/BITMASK, when no eligible version matches.
VersionId choose_version(const TaskSet& tasks, TaskId task, const SelectionContext& ctx,
                         VersionSelection method, const AcceleratorRegistry* registry);

// Single-unit accelerators with holder tracking and single-level priority
// inheritance. Not synchronised.
class AcceleratorRegistry {
 public:
  explicit AcceleratorRegistry(std::size_t count = 0);

  struct Outcome {
    bool acquired = false;
    // Holder of the first busy accelerator when not acquired.
    Job* holder = nullptr;
    // The holder's effective priority was raised.
    bool inherited = false;
  };

  bool busy(AccelId id) const;
  Job* holder(AccelId id) const;
  std::size_t size() const { return slots_.size(); }

  // All-or-nothing acquisition of the version's accelerators. When blocked,
  // the requester is recorded as a waiter of the busy accelerator and, with
  // `inherit`, a lower-priority holder takes the requester's key. Throws
  // UsageError if `job` already holds an accelerator.
  Outcome acquire(Job& job, std::span<const AccelId> accels, bool inherit);

  // Frees everything `job` holds, drops its inherited priority and returns
  // the jobs that were waiting on those accelerators, in wait order.
  std::vector<Job*> release(Job& job);

  bool holds_any(const Job& job) const;

 private:
  struct Slot {
    Job* holder = nullptr;
    std::vector<Job*> waiters;
  };
  std::vector<Slot> slots_;
};

}  // namespace rtmw
