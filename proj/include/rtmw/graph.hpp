#pragma once

#include <cstddef>
#include <functional>

#include "rtmw/ids.hpp"

namespace rtmw {

struct TaskSet;

// Tokens a data-activated task may still claim on a channel: occupancy minus
// tokens already reserved by released-but-not-started consumer jobs.
using TokenAvailability = std::function<std::size_t(ChannelId)>;

// True iff `task` is data-activated and every input channel offers at least
// its required tokens. Time-triggered tasks and tasks without inputs never
// auto-activate through this rule.
bool check_activation(const TaskSet& tasks, TaskId task, const TokenAvailability& available);

}  // namespace rtmw
