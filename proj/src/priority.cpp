#include "rtmw/priority.hpp"

#include "rtmw/error.hpp"
#include "rtmw/job.hpp"
#include "rtmw/task_set.hpp"

namespace rtmw {

PriorityKey assign_priority(const PolicyConfig& config, const TaskSet& tasks, const Job& job) {
  const TaskDescriptor& task = tasks.task(job.task);
  PriorityKey key;
  key.task = job.task.value;
  key.seq = job.seq;
  if (task.kind == TaskKind::kAperiodic) {
    key.cls = PriorityClass::kAperiodic;
    key.primary = job.abs_release;
    return key;
  }
  key.cls = PriorityClass::kRecurring;
  switch (config.priority_assignment) {
    case PriorityAssignment::kRM:
      key.primary = tasks.effective_period(job.task);
      break;
    case PriorityAssignment::kDM:
      key.primary = tasks.effective_deadline(job.task);
      break;
    case PriorityAssignment::kEDF:
      key.primary = job.abs_deadline;
      break;
    case PriorityAssignment::kUser: {
      auto prio = task.user_priority;
      if (!prio) prio = tasks.task(tasks.graph_root(job.task)).user_priority;
      if (!prio) throw ConfigError("task '" + task.name + "' has no user_priority under USER assignment");
      key.primary = *prio;
      break;
    }
  }
  return key;
}

std::size_t sort_ready(std::vector<Job*>& queue) {
  // Insertion sort: queues are short, mostly sorted after each insertion and
  // the move count is observable.
  std::size_t moves = 0;
  for (std::size_t i = 1; i < queue.size(); ++i) {
    Job* cur = queue[i];
    const PriorityKey key = cur->effective_key();
    std::size_t j = i;
    while (j > 0 && key.higher_than(queue[j - 1]->effective_key())) {
      queue[j] = queue[j - 1];
      --j;
      ++moves;
    }
    queue[j] = cur;
  }
  return moves;
}

}  // namespace rtmw
