#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "rtmw/config.hpp"
#include "rtmw/ids.hpp"
#include "rtmw/time.hpp"

namespace rtmw {

struct TaskSet;
struct Job;

enum class PriorityClass : std::uint8_t { kRecurring = 0, kAperiodic = 1 };

// Total order over jobs. Smaller compares first and means HIGHER priority:
// class, then the policy ordinal (period, deadline, absolute deadline or user
// priority), then task id, then job sequence.
struct PriorityKey {
  PriorityClass cls = PriorityClass::kRecurring;
  std::int64_t primary = 0;
  std::uint32_t task = 0;
  std::uint64_t seq = 0;

  friend constexpr auto operator<=>(const PriorityKey&, const PriorityKey&) = default;

  // True when this key denotes strictly higher priority than `other`.
  bool higher_than(const PriorityKey& other) const { return *this < other; }
};

// Key for a job whose abs_release/abs_deadline are set. Aperiodic jobs are
// keyed by activation instant below every recurring job. Throws ConfigError
// for USER assignment on a task without user_priority.
PriorityKey assign_priority(const PolicyConfig& config, const TaskSet& tasks, const Job& job);

// Stable ascending sort by effective key; returns the number of element moves
// performed (0 for an already sorted queue).
std::size_t sort_ready(std::vector<Job*>& queue);

}  // namespace rtmw
