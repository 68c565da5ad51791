#include "rtmw/graph.hpp"

#include "rtmw/task_set.hpp"

namespace rtmw {

bool check_activation(const TaskSet& tasks, TaskId task, const TokenAvailability& available) {
  if (!tasks.data_activated(task)) return false;
  for (ChannelId c : tasks.inputs(task)) {
    if (available(c) < tasks.channel(c).required_tokens) return false;
  }
  return true;
}

}  // namespace rtmw
